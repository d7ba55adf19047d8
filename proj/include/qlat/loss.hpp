#pragma once

#include <span>
#include <vector>

#include "qlat/common.hpp"
#include "qlat/data.hpp"
#include "qlat/model.hpp"
#include "qlat/rng.hpp"

namespace qlat {

// Pinball loss max(tau*(y - yhat), (tau-1)*(y - yhat)). Zero iff y == yhat.
double pinball(double y, double yhat, double tau);

// Chosen subgradient w.r.t. yhat: -tau if y > yhat, (1-tau) if y < yhat,
// 0 at equality.
double pinball_subgrad_yhat(double y, double yhat, double tau);

// Sampling law for the quantile during training. BetaMode is parameterized
// by (mode, concentration): alpha = mode*(C-2)+1, beta = (1-mode)*(C-2)+1,
// so the density peaks at the mode and C=2 is Uniform(0,1).
struct TauDistribution {
  enum class Kind { Uniform, Discrete, BetaMode, Point };
  Kind kind = Kind::Uniform;
  std::vector<double> taus;   // Discrete
  std::vector<double> probs;  // Discrete; empty = equal
  double mode = 0.5;          // BetaMode
  double concentration = 2.0;
  double point = 0.5;  // Point

  static TauDistribution uniform();
  static TauDistribution discrete(std::vector<double> taus, std::vector<double> probs = {});
  static TauDistribution beta_mode(double mode, double concentration);
  static TauDistribution point_mass(double tau);

  double alpha() const { return mode * (concentration - 2.0) + 1.0; }
  double beta() const { return (1.0 - mode) * (concentration - 2.0) + 1.0; }
  void validate() const;
};

// One draw from the law, clipped to [1e-4, 1 - 1e-4].
double sample_tau(const TauDistribution& dist, Rng& rng);

struct BatchObjective {
  double loss = 0.0;
  std::vector<double> grad;  // dense over the model parameter vector
};

// Mean pinball loss and parameter gradient over the given rows with one tau
// per example. Work is chunked (64 examples) and partial sums are reduced in
// chunk order, so Serial and Parallel produce bit-identical results.
BatchObjective pinball_batch_grad(const QuantileModel& model, const Dataset& data,
                                  std::span<const std::size_t> rows,
                                  std::span<const double> taus, Execution exec);

// Draws one fresh tau per example (in row order) and delegates. This is the
// expected pinball loss of the training objective.
BatchObjective expected_pinball_batch(const QuantileModel& model, const Dataset& data,
                                      std::span<const std::size_t> rows,
                                      const TauDistribution& dist, Rng& rng,
                                      Execution exec);

}  // namespace qlat
