#pragma once
#include <limits>
#include <utility>
#include <vector>

namespace cadec::detail {

// Monotonic max queue over a sliding index window. Positions are pushed in
// increasing order; the buffer keeps candidates with strictly decreasing keys
// (ties collapse to the earliest position, which the reconstruction never
// relies on: it rescans windows itself).
struct SlideMax {
  std::vector<std::pair<int, double>> buf;
  size_t head = 0;

  void push(int pos, double key) {
    while (buf.size() > head && buf.back().second <= key) buf.pop_back();
    buf.emplace_back(pos, key);
  }
  void drop_before(int lo) {
    while (head < buf.size() && buf[head].first < lo) ++head;
  }
  bool empty() const { return head >= buf.size(); }
  double max_key() const {
    return empty() ? -std::numeric_limits<double>::infinity() : buf[head].second;
  }
};

}  // namespace cadec::detail
