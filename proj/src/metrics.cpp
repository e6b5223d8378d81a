#include "cadec/metrics.hpp"
#include "cadec/errors.hpp"
#include <algorithm>
#include <set>

namespace cadec {

namespace {

std::vector<int> transcript(const std::vector<Segment>& segs) {
  std::vector<int> t;
  t.reserve(segs.size());
  for (const auto& s : segs) t.push_back(s.cls);
  return t;
}

int levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  std::vector<int> prev(m + 1), cur(m + 1);
  for (int j = 0; j <= m; ++j) prev[j] = j;
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    for (int j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double interval_iou(const Segment& a, const Segment& b) {
  const int inter =
      std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start) + 1);
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Segment> drop_classes(const std::vector<Segment>& segs,
                                  const std::set<int>& ignore) {
  if (ignore.empty()) return segs;
  std::vector<Segment> out;
  for (const auto& s : segs)
    if (!ignore.count(s.cls)) out.push_back(s);
  return out;
}

}  // namespace

double frame_accuracy(const LabelSeq& pred, const LabelSeq& gt) {
  if (pred.size() != gt.size())
    throw LengthMismatch("prediction has " + std::to_string(pred.size()) +
                         " frames, ground truth has " + std::to_string(gt.size()));
  if (gt.empty()) throw LengthMismatch("empty sequences");
  size_t hit = 0;
  for (size_t t = 0; t < gt.size(); ++t)
    if (pred[t] == gt[t]) ++hit;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(gt.size());
}

double edit_score(const LabelSeq& pred, const LabelSeq& gt) {
  if (pred.empty() || gt.empty()) throw LengthMismatch("empty sequences");
  const auto a = transcript(segments_of(pred));
  const auto b = transcript(segments_of(gt));
  const int d = levenshtein(a, b);
  const double denom = static_cast<double>(std::max(a.size(), b.size()));
  const double score = 100.0 * (1.0 - static_cast<double>(d) / denom);
  return std::clamp(score, 0.0, 100.0);
}

double F1Counts::f1() const {
  if (tp == 0) return 0.0;
  const double p = static_cast<double>(tp) / static_cast<double>(n_pred);
  const double r = static_cast<double>(tp) / static_cast<double>(n_gt);
  return 100.0 * (2.0 * p * r) / (p + r);
}

F1Counts f1_counts(const std::vector<Segment>& pred,
                   const std::vector<Segment>& gt, double tau) {
  F1Counts c;
  c.n_pred = static_cast<int>(pred.size());
  c.n_gt = static_cast<int>(gt.size());
  std::vector<bool> used(gt.size(), false);
  for (const auto& p : pred) {
    int pick = -1;
    double best = -1.0;
    for (size_t j = 0; j < gt.size(); ++j) {
      if (used[j] || gt[j].cls != p.cls) continue;
      const double iou = interval_iou(p, gt[j]);
      if (iou > best) {
        best = iou;
        pick = static_cast<int>(j);
      }
    }
    if (pick >= 0 && best >= tau) {
      used[pick] = true;
      ++c.tp;
    }
  }
  return c;
}

double f1_at(const LabelSeq& pred, const LabelSeq& gt, double tau) {
  if (pred.size() != gt.size())
    throw LengthMismatch("prediction has " + std::to_string(pred.size()) +
                         " frames, ground truth has " + std::to_string(gt.size()));
  return f1_counts(segments_of(pred), segments_of(gt), tau).f1();
}

EvalReport evaluate_corpus(
    const std::vector<std::pair<LabelSeq, LabelSeq>>& pairs,
    const EvalOptions& opts) {
  if (pairs.empty()) throw EmptyCorpus("nothing to evaluate");
  const std::set<int> ignore(opts.ignore_classes.begin(),
                             opts.ignore_classes.end());

  EvalReport rep;
  size_t frames = 0, hits = 0;
  double edit_sum = 0.0;
  std::map<double, F1Counts> pooled;
  for (double tau : opts.taus) pooled[tau] = F1Counts{};

  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& pred = pairs[i].first;
    const auto& gt = pairs[i].second;
    if (pred.size() != gt.size()) {
      const std::string id =
          i < opts.ids.size() ? opts.ids[i] : ("pair " + std::to_string(i));
      throw LengthMismatch(id + ": prediction has " +
                           std::to_string(pred.size()) +
                           " frames, ground truth has " +
                           std::to_string(gt.size()));
    }
    size_t vf = 0, vh = 0;
    for (size_t t = 0; t < gt.size(); ++t) {
      if (ignore.count(gt[t])) continue;
      ++vf;
      if (pred[t] == gt[t]) ++vh;
    }
    frames += vf;
    hits += vh;

    const auto psegs = drop_classes(segments_of(pred), ignore);
    const auto gsegs = drop_classes(segments_of(gt), ignore);
    const auto pt = transcript(psegs);
    const auto gtd = transcript(gsegs);
    double ed = 100.0;
    if (!pt.empty() || !gtd.empty()) {
      const double denom = static_cast<double>(std::max(pt.size(), gtd.size()));
      ed = std::clamp(
          100.0 * (1.0 - static_cast<double>(levenshtein(pt, gtd)) / denom), 0.0,
          100.0);
    }
    edit_sum += ed;

    EvalReport::PerVideo pv;
    if (opts.per_video) {
      pv.id = i < opts.ids.size() ? opts.ids[i] : std::to_string(i);
      pv.acc = vf == 0 ? 100.0
                       : 100.0 * static_cast<double>(vh) / static_cast<double>(vf);
      pv.edit = ed;
    }
    for (double tau : opts.taus) {
      const F1Counts c = f1_counts(psegs, gsegs, tau);
      pooled[tau].tp += c.tp;
      pooled[tau].n_pred += c.n_pred;
      pooled[tau].n_gt += c.n_gt;
      if (opts.per_video) pv.f1[tau] = c.f1();
    }
    if (opts.per_video) rep.per_video.push_back(std::move(pv));
  }

  rep.acc = frames == 0
                ? 100.0
                : 100.0 * static_cast<double>(hits) / static_cast<double>(frames);
  rep.edit = edit_sum / static_cast<double>(pairs.size());
  for (const auto& [tau, c] : pooled) rep.f1[tau] = c.f1();
  return rep;
}

}
