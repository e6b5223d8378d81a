#pragma once
#include <Eigen/Dense>
#include <vector>

namespace cadec {

// Frame-wise class probabilities, one row per frame. Row-major so a frame's
// scores are contiguous, matching the access pattern of the decoders.
using ProbMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using LabelSeq = std::vector<int>;

struct Segment {
  int cls;
  int start;  // first frame, inclusive
  int end;    // last frame, inclusive

  int length() const { return end - start + 1; }
  bool operator==(const Segment& o) const {
    return cls == o.cls && start == o.start && end == o.end;
  }
};

// Maximal runs of equal labels; concatenating them reconstructs the sequence.
std::vector<Segment> segments_of(const LabelSeq& labels);

LabelSeq labels_from_segments(const std::vector<Segment>& segs);

}
