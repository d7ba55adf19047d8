#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qlat/data.hpp"
#include "qlat/loss.hpp"
#include "qlat/model.hpp"
#include "qlat/rates.hpp"
#include "qlat/train_types.hpp"

namespace qlat {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  std::uint64_t seed = 1;
  double learning_rate = 0.001;
  TauDistribution tau_dist;
  double projection_tol = 1e-9;
  // Validation selection metric: mean pinball over these taus.
  std::vector<double> validation_taus = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  Execution exec = Execution::Parallel;

  std::vector<RateConstraintSpec> constraints;
  double multiplier_lr = 0.01;
  // Sigmoid temperature = temperature_factor * label standard deviation.
  double temperature_factor = 0.05;
  std::optional<double> best_iterate_tolerance;

  void validate() const;
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double max_violation = 0.0;  // constrained runs only
};

struct FitResult {
  QuantileModel model;  // best iterate
  std::vector<EpochStat> history;
  int best_epoch = 0;
  bool aborted = false;  // training hit a numerical error; model is last good
  // Parameter snapshots per epoch (used by tests and best-iterate selection).
  std::vector<std::vector<double>> snapshots;
};

// Projected stochastic training: per step, shuffle-batched expected-pinball
// gradient (plus Lagrangian terms when constrained), Adam update, projection.
// Per epoch the validation metric and, when constrained, the max true
// violation are logged. Returns the best iterate: lowest validation pinball
// epoch, or best_iterate() over the log when constrained.
//
// Rate constraints evaluate against constraint_data when given, otherwise
// against the training set.
FitResult fit(QuantileModel model, const Dataset& train_data, const Dataset& val_data,
              const TrainConfig& config, const Dataset* constraint_data = nullptr);

struct PinballEval {
  std::vector<double> taus;
  std::vector<double> per_tau;
  double overall = 0.0;
};

// Mean pinball per requested tau plus the overall mean.
PinballEval evaluate_pinball(const QuantileModel& model, const Dataset& data,
                             std::span<const double> taus,
                             Execution exec = Execution::Serial);

}  // namespace qlat
