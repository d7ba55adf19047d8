#include "qlat/rng.hpp"

#include <cmath>

#include "qlat/common.hpp"
#include "qlat/special.hpp"

namespace qlat {

double Rng::normal() { return normal_inv(uniform()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InputError("gamma: shape must be positive");
  if (shape < 1.0) {
    // boost: Gamma(a) = Gamma(a+1) * U^{1/a}
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double g1 = gamma(a);
  const double g2 = gamma(b);
  return g1 / (g1 + g2);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  // Mix the index into the seed through one splitmix round so nearby
  // indices give unrelated streams.
  Rng mixer(seed ^ (0x632BE59BD9B4E019ull * (index + 1)));
  return Rng(mixer.next_u64());
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace qlat
