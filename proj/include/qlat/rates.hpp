#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlat/data.hpp"
#include "qlat/loss.hpp"
#include "qlat/model.hpp"
#include "qlat/train_types.hpp"

namespace qlat {

// One two-sided rate constraint: the empirical fraction of labels below the
// tau_s prediction on the selected subset must lie in
// [tau_s - eps_minus, tau_s + eps_plus].
struct RateConstraintSpec {
  std::string subset_column;  // empty + value "all" selects every row
  std::string subset_value = "all";
  double tau_s = 0.5;
  double eps_minus = 0.05;
  double eps_plus = 0.05;

  void validate() const;
};

// (1/|D_s|) sum I[y <= f(x, tau_s)].
double empirical_rate(const QuantileModel& model, const Dataset& data,
                      std::span<const std::size_t> rows, double tau_s,
                      Execution exec = Execution::Serial);

// (lower, upper) constraint violations, both clamped at zero.
std::pair<double, double> violation(const RateConstraintSpec& spec, double rate);

struct SurrogateRate {
  double rate = 0.0;
  std::vector<double> grad;  // dense over the model parameter vector
};

// Differentiable stand-in for the indicator rate: mean of
// sigmoid((f(x, tau_s) - y) / temperature) with its parameter gradient.
// Ascending this gradient raises the rate; descending lowers it.
SurrogateRate surrogate_rate(const QuantileModel& model, const Dataset& data,
                             std::span<const std::size_t> rows, double tau_s,
                             double temperature, Execution exec = Execution::Serial);

struct IterateRecord {
  int snapshot_id = 0;
  double objective = 0.0;
  double max_violation = 0.0;
};

// One nonnegative multiplier per one-sided constraint (two per spec) plus
// the per-epoch iterate log used for best-iterate selection.
struct MultiplierState {
  std::vector<double> lambda_lower;
  std::vector<double> lambda_upper;
  double multiplier_lr = 0.01;
  std::vector<IterateRecord> log;
};

// Constraint specs resolved against their dataset.
struct ConstraintSet {
  const Dataset* data = nullptr;
  std::vector<RateConstraintSpec> specs;
  std::vector<std::vector<std::size_t>> rows;
  double temperature = 0.05;

  static ConstraintSet resolve(const Dataset& data,
                               std::span<const RateConstraintSpec> specs,
                               double temperature);
  // Largest violation across all constraints at the current model.
  double max_true_violation(const QuantileModel& model, Execution exec) const;
};

// One constrained training step: the model descends the batch pinball
// gradient plus sum_s (lambda_upper - lambda_lower) * grad of the surrogate
// rate, is projected, and the multipliers then ascend on the signed
// indicator-rate residuals, clamped at zero. Returns the batch pinball loss.
double lagrangian_step(QuantileModel& model, const Dataset& train,
                       std::span<const std::size_t> batch_rows,
                       const TauDistribution& dist, Rng& rng, const ConstraintSet& cs,
                       MultiplierState& state, AdamState& adam, double projection_tol,
                       Execution exec);

// Among iterates whose max violation is within the tolerance (default: the
// smallest violation attained plus 0.005), the one with the lowest
// objective; if none qualifies, the iterate with the smallest violation.
int best_iterate(std::span<const IterateRecord> log,
                 std::optional<double> tolerance = std::nullopt);

}  // namespace qlat
