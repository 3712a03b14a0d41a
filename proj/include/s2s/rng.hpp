#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace s2s {

// Seeded generator with portable draws. std::mt19937_64 output is fully
// specified by the standard, but the <random> distributions are not, so all
// bounded draws go through the helpers below to keep results identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // k distinct indices from [0, n) by partial Fisher-Yates; order is the draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace s2s
