#pragma once

#include <span>
#include <vector>

namespace qlat {

// Standard bias-corrected Adam.
struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  long step = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate)
      : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

// In-place update. Throws NumericalError on non-finite gradients.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

}  // namespace qlat
