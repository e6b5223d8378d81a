#pragma once
#include "types.hpp"
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cadec {

struct EvalReport {
  double acc = 0.0;   // frame-pooled percentage
  double edit = 0.0;  // per-video average
  std::map<double, double> f1;  // IoU threshold -> micro-averaged percentage

  struct PerVideo {
    std::string id;
    double acc = 0.0, edit = 0.0;
    std::map<double, double> f1;
  };
  std::vector<PerVideo> per_video;
};

struct EvalOptions {
  std::vector<double> taus = {0.10, 0.25, 0.50};
  std::vector<int> ignore_classes;     // GT classes excluded from all metrics
  bool per_video = false;
  std::vector<std::string> ids;        // optional, parallel to pairs
};

double frame_accuracy(const LabelSeq& pred, const LabelSeq& gt);

// 100 * (1 - Levenshtein(pred transcript, gt transcript) / max(lengths))
double edit_score(const LabelSeq& pred, const LabelSeq& gt);

// Segment-level counts behind F1: a predicted segment scores a true positive
// when the unused same-class GT segment of highest interval IoU reaches tau;
// GT segments are consumed at most once, predictions matched in temporal order.
struct F1Counts {
  int tp = 0;
  int n_pred = 0;
  int n_gt = 0;
  double f1() const;  // 2PR/(P+R) as a percentage, 0 when tp == 0
};
F1Counts f1_counts(const std::vector<Segment>& pred,
                   const std::vector<Segment>& gt, double tau);

double f1_at(const LabelSeq& pred, const LabelSeq& gt, double tau);

EvalReport evaluate_corpus(
    const std::vector<std::pair<LabelSeq, LabelSeq>>& pairs,  // (pred, gt)
    const EvalOptions& opts = {});

}
