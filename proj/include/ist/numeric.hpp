#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace ist {

// Neumaier-compensated sum. Results are independent of how callers chunk
// work as long as the input order is fixed.
inline double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

class CompensatedAccumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for one (task, dimension, draw) cell of a run. Every stochastic
// choice in the toolkit goes through this so results never depend on
// scheduling or on shared generator state.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task, std::uint64_t dim,
                                    std::uint64_t draw) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (task * 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ (dim * 0xa0761d6478bd642fULL));
  h = mix64(h ^ (draw * 0xe7037ed1a0b428dbULL));
  return h;
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double unit_interval(std::uint64_t seed) {
  return static_cast<double>(mix64(seed) >> 11) * 0x1.0p-53;
}

}  // namespace ist
