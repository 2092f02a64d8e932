#pragma once

#include "sweepsim/types.hpp"

#include <cstdint>
#include <vector>

namespace sweepsim {

/// Halton low-discrepancy sequence over [0,1)^dim. The seed selects a fixed
/// offset into the sequence, so identical seeds reproduce identical draws.
class HaltonSampler {
 public:
  HaltonSampler(int dim, std::uint64_t seed);

  /// Next point in [0,1)^dim.
  Point next01();

  /// Next point mapped into the box.
  Point next(const Box& box);

  /// Next scalar in [lo, hi) (uses the first coordinate only).
  double next_scalar(double lo, double hi);

  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t index_;
};

std::uint64_t splitmix64(std::uint64_t x);

double halton(std::uint64_t index, int base);

}  // namespace sweepsim
