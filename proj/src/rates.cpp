#include "qlat/rates.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

void RateConstraintSpec::validate() const {
  if (!(tau_s > 0.0) || !(tau_s < 1.0))
    throw ConfigError("rate constraint: tau_s must be in (0,1)");
  if (eps_minus < 0.0 || eps_minus > 1.0 || eps_plus < 0.0 || eps_plus > 1.0)
    throw ConfigError("rate constraint: slacks must be in [0,1]");
}

double empirical_rate(const QuantileModel& model, const Dataset& data,
                      std::span<const std::size_t> rows, double tau_s, Execution exec) {
  if (rows.empty()) throw ConfigError("empirical_rate: empty subset");
  long long count = 0;
  const long long n = static_cast<long long>(rows.size());
  if (exec == Execution::Parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      PredictWork ws;
#pragma omp for schedule(static) reduction(+ : count)
      for (long long i = 0; i < n; ++i) {
        const std::size_t r = rows[i];
        if (data.labels[r] <= predict(model, data.row(r), tau_s, ws)) ++count;
      }
    }
#else
    exec = Execution::Serial;
#endif
  }
  if (exec == Execution::Serial) {
    PredictWork ws;
    for (long long i = 0; i < n; ++i) {
      const std::size_t r = rows[i];
      if (data.labels[r] <= predict(model, data.row(r), tau_s, ws)) ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(n);
}

std::pair<double, double> violation(const RateConstraintSpec& spec, double rate) {
  const double lower = std::max(0.0, (spec.tau_s - spec.eps_minus) - rate);
  const double upper = std::max(0.0, rate - (spec.tau_s + spec.eps_plus));
  return {lower, upper};
}

namespace {

constexpr std::size_t kChunk = 64;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double surrogate_chunk(const QuantileModel& model, const Dataset& data,
                       std::span<const std::size_t> rows, double tau_s, double temperature,
                       std::size_t begin, std::size_t end, PredictWork& ws,
                       std::span<double> grad_acc) {
  double rate = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t r = rows[i];
    const double f = forward_sparse_grad(model, data.row(r), tau_s, ws);
    const double s = sigmoid((f - data.labels[r]) / temperature);
    rate += s;
    const double coeff = s * (1.0 - s) / temperature;
    if (coeff != 0.0) {
      for (std::size_t e = 0; e < ws.grad_index.size(); ++e)
        grad_acc[ws.grad_index[e]] += coeff * ws.grad_value[e];
    }
  }
  return rate;
}

}  // namespace

SurrogateRate surrogate_rate(const QuantileModel& model, const Dataset& data,
                             std::span<const std::size_t> rows, double tau_s,
                             double temperature, Execution exec) {
  if (rows.empty()) throw ConfigError("surrogate_rate: empty subset");
  if (!(temperature > 0.0)) throw InputError("surrogate_rate: temperature must be positive");
  const std::size_t n = rows.size();
  const std::size_t P = model.layout.total;
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> chunk_rate(nchunks, 0.0);
  std::vector<double> chunk_grad(nchunks * P, 0.0);

  if (exec == Execution::Parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      PredictWork ws;
#pragma omp for schedule(static)
      for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        chunk_rate[c] = surrogate_chunk(model, data, rows, tau_s, temperature, begin, end,
                                        ws, {chunk_grad.data() + c * P, P});
      }
    }
#else
    exec = Execution::Serial;
#endif
  }
  if (exec == Execution::Serial) {
    PredictWork ws;
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      chunk_rate[c] = surrogate_chunk(model, data, rows, tau_s, temperature, begin, end, ws,
                                      {chunk_grad.data() + c * P, P});
    }
  }

  SurrogateRate out;
  out.grad.assign(P, 0.0);
  double rate = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    rate += chunk_rate[c];
    const double* g = chunk_grad.data() + c * P;
    for (std::size_t p = 0; p < P; ++p) out.grad[p] += g[p];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.rate = rate * inv_n;
  for (double& g : out.grad) g *= inv_n;
  return out;
}

ConstraintSet ConstraintSet::resolve(const Dataset& data,
                                     std::span<const RateConstraintSpec> specs,
                                     double temperature) {
  ConstraintSet cs;
  cs.data = &data;
  cs.temperature = temperature;
  for (const auto& spec : specs) {
    spec.validate();
    auto rows = data.subset_rows(spec.subset_value);
    if (rows.empty())
      throw ConfigError("rate constraint: subset '" + spec.subset_value +
                        "' matches no rows");
    cs.specs.push_back(spec);
    cs.rows.push_back(std::move(rows));
  }
  return cs;
}

double ConstraintSet::max_true_violation(const QuantileModel& model, Execution exec) const {
  double worst = 0.0;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const double rate = empirical_rate(model, *data, rows[s], specs[s].tau_s, exec);
    const auto [lo, hi] = violation(specs[s], rate);
    worst = std::max({worst, lo, hi});
  }
  return worst;
}

double lagrangian_step(QuantileModel& model, const Dataset& train,
                       std::span<const std::size_t> batch_rows,
                       const TauDistribution& dist, Rng& rng, const ConstraintSet& cs,
                       MultiplierState& state, AdamState& adam, double projection_tol,
                       Execution exec) {
  BatchObjective obj = expected_pinball_batch(model, train, batch_rows, dist, rng, exec);
  for (std::size_t s = 0; s < cs.specs.size(); ++s) {
    const double lam = state.lambda_upper[s] - state.lambda_lower[s];
    if (lam == 0.0) continue;
    const SurrogateRate sr =
        surrogate_rate(model, *cs.data, cs.rows[s], cs.specs[s].tau_s, cs.temperature, exec);
    for (std::size_t p = 0; p < obj.grad.size(); ++p) obj.grad[p] += lam * sr.grad[p];
  }
  adam_step(model.params, obj.grad, adam);
  project_model(model, projection_tol);

  // Multiplier ascent on the signed indicator-rate residuals, projected to
  // the nonnegative orthant.
  for (std::size_t s = 0; s < cs.specs.size(); ++s) {
    const double rate = empirical_rate(model, *cs.data, cs.rows[s], cs.specs[s].tau_s, exec);
    const auto& spec = cs.specs[s];
    state.lambda_upper[s] = std::max(
        0.0, state.lambda_upper[s] + state.multiplier_lr * (rate - (spec.tau_s + spec.eps_plus)));
    state.lambda_lower[s] = std::max(
        0.0,
        state.lambda_lower[s] + state.multiplier_lr * ((spec.tau_s - spec.eps_minus) - rate));
  }
  return obj.loss;
}

int best_iterate(std::span<const IterateRecord> log, std::optional<double> tolerance) {
  if (log.empty()) throw InputError("best_iterate: empty iterate log");
  double min_viol = log[0].max_violation;
  for (const auto& rec : log) min_viol = std::min(min_viol, rec.max_violation);
  const double tol = tolerance.value_or(min_viol + 0.005);

  int best = -1;
  for (const auto& rec : log) {
    if (rec.max_violation > tol) continue;
    if (best < 0 || rec.objective < log[best].objective ||
        (rec.objective == log[best].objective &&
         rec.max_violation < log[best].max_violation)) {
      best = static_cast<int>(&rec - log.data());
    }
  }
  if (best >= 0) return log[best].snapshot_id;
  // none feasible at the requested tolerance
  std::size_t arg = 0;
  for (std::size_t i = 1; i < log.size(); ++i)
    if (log[i].max_violation < log[arg].max_violation) arg = i;
  return log[arg].snapshot_id;
}

}  // namespace qlat
