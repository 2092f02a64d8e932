#include "sweepsim/sampling.hpp"

#include <array>

namespace sweepsim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
constexpr std::array<int, 8> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19};
}

double halton(std::uint64_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

HaltonSampler::HaltonSampler(int dim, std::uint64_t seed)
    : dim_(dim), index_(1 + splitmix64(seed) % 100003) {}

Point HaltonSampler::next01() {
  Point p(dim_);
  for (int k = 0; k < dim_; ++k)
    p[k] = halton(index_, kPrimes[static_cast<std::size_t>(k) % kPrimes.size()]);
  ++index_;
  return p;
}

Point HaltonSampler::next(const Box& box) {
  Point u = next01();
  Point p(dim_);
  for (int k = 0; k < dim_; ++k) p[k] = box.lo[k] + u[k] * box.extent(k);
  return p;
}

double HaltonSampler::next_scalar(double lo, double hi) {
  double u = halton(index_, kPrimes[0]);
  ++index_;
  return lo + u * (hi - lo);
}

}  // namespace sweepsim
