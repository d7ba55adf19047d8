#include "qlat/train.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw InputError("adam_step: shape mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericalError("adam_step: non-finite gradient");
  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (!(projection_tol > 0.0)) throw ConfigError("train: projection_tol must be positive");
  if (validation_taus.empty()) throw ConfigError("train: validation_taus must be nonempty");
  for (double t : validation_taus)
    if (!(t > 0.0) || !(t < 1.0)) throw ConfigError("train: validation taus must be in (0,1)");
  tau_dist.validate();
  for (const auto& c : constraints) c.validate();
}

namespace {

constexpr std::size_t kChunk = 64;

void check_model_matches(const QuantileModel& model, const Dataset& data) {
  if (model.config.features.size() != data.cols())
    throw ConfigError("fit: model/dataset feature count mismatch");
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (model.config.features[j].name != data.schema.features[j].name)
      throw ConfigError("fit: feature order mismatch at '" +
                        data.schema.features[j].name + "'");
  }
}

}  // namespace

PinballEval evaluate_pinball(const QuantileModel& model, const Dataset& data,
                             std::span<const double> taus, Execution exec) {
  if (data.rows() == 0) throw InputError("evaluate_pinball: empty dataset");
  if (taus.empty()) throw InputError("evaluate_pinball: no taus requested");
  PinballEval result;
  result.taus.assign(taus.begin(), taus.end());
  result.per_tau.assign(taus.size(), 0.0);

  const std::size_t n = data.rows();
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> chunk_sum(nchunks * taus.size());

  auto run_chunk = [&](std::size_t c, PredictWork& ws) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    double* sums = chunk_sum.data() + c * taus.size();
    std::fill(sums, sums + taus.size(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t t = 0; t < taus.size(); ++t) {
        const double f = predict(model, data.row(i), taus[t], ws);
        sums[t] += pinball(data.labels[i], f, taus[t]);
      }
    }
  };

  if (exec == Execution::Parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      PredictWork ws;
#pragma omp for schedule(static)
      for (long long c = 0; c < static_cast<long long>(nchunks); ++c)
        run_chunk(static_cast<std::size_t>(c), ws);
    }
#else
    exec = Execution::Serial;
#endif
  }
  if (exec == Execution::Serial) {
    PredictWork ws;
    for (std::size_t c = 0; c < nchunks; ++c) run_chunk(c, ws);
  }

  for (std::size_t c = 0; c < nchunks; ++c) {
    const double* sums = chunk_sum.data() + c * taus.size();
    for (std::size_t t = 0; t < taus.size(); ++t) result.per_tau[t] += sums[t];
  }
  double overall = 0.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    result.per_tau[t] /= static_cast<double>(n);
    overall += result.per_tau[t];
  }
  result.overall = overall / static_cast<double>(taus.size());
  return result;
}

FitResult fit(QuantileModel model, const Dataset& train_data, const Dataset& val_data,
              const TrainConfig& config, const Dataset* constraint_data) {
  config.validate();
  if (train_data.rows() == 0 || val_data.rows() == 0)
    throw ConfigError("fit: datasets must be nonempty");
  check_model_matches(model, train_data);
  check_model_matches(model, val_data);

  const bool constrained = !config.constraints.empty();
  project_model(model, config.projection_tol);

  AdamState adam(model.params.size(), config.learning_rate);
  Rng rng(config.seed);

  ConstraintSet cs;
  MultiplierState ms;
  if (constrained) {
    const Dataset& cdata = constraint_data ? *constraint_data : train_data;
    if (constraint_data) check_model_matches(model, cdata);
    double temp = config.temperature_factor * cdata.label_std();
    if (!(temp > 0.0)) temp = config.temperature_factor;
    cs = ConstraintSet::resolve(cdata, config.constraints, temp);
    ms.multiplier_lr = config.multiplier_lr;
    ms.lambda_lower.assign(cs.specs.size(), 0.0);
    ms.lambda_upper.assign(cs.specs.size(), 0.0);
  }

  FitResult result;
  result.model = model;
  const std::size_t n = train_data.rows();
  bool aborted = false;

  for (int epoch = 0; epoch < config.epochs && !aborted; ++epoch) {
    const std::vector<std::size_t> perm = shuffled_indices(n, rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    try {
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t len = std::min<std::size_t>(config.batch_size, n - start);
        const std::span<const std::size_t> batch(perm.data() + start, len);
        double batch_loss;
        if (constrained) {
          batch_loss = lagrangian_step(model, train_data, batch, config.tau_dist, rng, cs,
                                       ms, adam, config.projection_tol, config.exec);
        } else {
          BatchObjective obj = expected_pinball_batch(model, train_data, batch,
                                                      config.tau_dist, rng, config.exec);
          if (!std::isfinite(obj.loss)) throw NumericalError("fit: loss is not finite");
          adam_step(model.params, obj.grad, adam);
          project_model(model, config.projection_tol);
          batch_loss = obj.loss;
        }
        if (!std::isfinite(batch_loss)) throw NumericalError("fit: loss is not finite");
        loss_sum += batch_loss * static_cast<double>(len);
        seen += len;
      }
    } catch (const NumericalError&) {
      // abort with the last good snapshot
      aborted = true;
      if (!result.snapshots.empty()) break;
      throw;  // no good snapshot yet
    }

    EpochStat stat;
    stat.epoch = epoch;
    stat.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    stat.val_metric =
        evaluate_pinball(model, val_data, config.validation_taus, config.exec).overall;
    if (constrained) {
      stat.max_violation = cs.max_true_violation(model, config.exec);
      ms.log.push_back(IterateRecord{epoch, stat.val_metric, stat.max_violation});
    }
    result.history.push_back(stat);
    result.snapshots.push_back(model.params);
  }

  if (result.snapshots.empty()) throw NumericalError("fit: no completed epochs");

  int best = 0;
  if (constrained) {
    best = best_iterate(ms.log, config.best_iterate_tolerance);
  } else {
    for (std::size_t e = 1; e < result.history.size(); ++e)
      if (result.history[e].val_metric < result.history[best].val_metric)
        best = static_cast<int>(e);
  }
  result.best_epoch = best;
  result.aborted = aborted;
  model.params = result.snapshots[best];
  result.model = std::move(model);
  return result;
}

}  // namespace qlat
