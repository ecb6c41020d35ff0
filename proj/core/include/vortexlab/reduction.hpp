#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vortexlab {

// Fixed-order pairwise (tree) summation. Deterministic for a given input
// order and noticeably more accurate than a running sum on long arrays.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

// Accumulates terms into a scratch buffer and reduces pairwise.
class PairwiseAccumulator {
public:
  explicit PairwiseAccumulator(std::size_t expected = 0) { buf_.reserve(expected); }
  void add(double v) { buf_.push_back(v); }
  double total() const { return pairwise_sum(buf_); }

private:
  std::vector<double> buf_;
};

}  // namespace vortexlab
