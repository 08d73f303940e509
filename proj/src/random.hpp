#pragma once

#include <cstdint>
#include <random>

namespace splat2d::detail {

/// mt19937_64 with a fixed double mapping, so sequences are identical across
/// standard libraries (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace splat2d::detail
