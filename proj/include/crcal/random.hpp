#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crcal {

// Seeded 64-bit stream. Uniform draws are built from raw engine output so the
// sequence is identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream derived from (seed, label).
  static Rng substream(std::uint64_t seed, std::string_view label);

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace crcal
