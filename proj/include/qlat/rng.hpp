#pragma once

#include <cstdint>
#include <vector>

namespace qlat {

// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
// <random> so that draws are identical across platforms and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1); never returns an exact endpoint.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the inverse CDF (one draw per variate).
  double normal();

  // Gamma(shape, 1) by Marsaglia-Tsang; any shape > 0.
  double gamma(double shape);

  // Beta(a, b) as a ratio of gammas.
  double beta(double a, double b);

  // Independent stream for item `index` under `seed`; the basis of
  // counter-style per-example generation (thread-count independent).
  static Rng stream(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t state_;
};

// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace qlat
