#include "qlat/loss.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

double pinball(double y, double yhat, double tau) {
  if (!(tau > 0.0) || !(tau < 1.0)) throw InputError("pinball: tau must be in (0,1)");
  const double diff = y - yhat;
  return std::max(tau * diff, (tau - 1.0) * diff);
}

double pinball_subgrad_yhat(double y, double yhat, double tau) {
  if (y > yhat) return -tau;
  if (y < yhat) return 1.0 - tau;
  return 0.0;
}

TauDistribution TauDistribution::uniform() { return TauDistribution{}; }

TauDistribution TauDistribution::discrete(std::vector<double> taus,
                                          std::vector<double> probs) {
  TauDistribution d;
  d.kind = Kind::Discrete;
  d.taus = std::move(taus);
  d.probs = std::move(probs);
  d.validate();
  return d;
}

TauDistribution TauDistribution::beta_mode(double mode, double concentration) {
  TauDistribution d;
  d.kind = Kind::BetaMode;
  d.mode = mode;
  d.concentration = concentration;
  d.validate();
  return d;
}

TauDistribution TauDistribution::point_mass(double tau) {
  TauDistribution d;
  d.kind = Kind::Point;
  d.point = tau;
  d.validate();
  return d;
}

void TauDistribution::validate() const {
  switch (kind) {
    case Kind::Uniform:
      break;
    case Kind::Discrete: {
      if (taus.empty()) throw ConfigError("tau distribution: empty discrete support");
      for (double t : taus)
        if (!(t > 0.0) || !(t < 1.0))
          throw ConfigError("tau distribution: discrete taus must be in (0,1)");
      if (!probs.empty()) {
        if (probs.size() != taus.size())
          throw ConfigError("tau distribution: probs/taus length mismatch");
        double sum = 0.0;
        for (double p : probs) {
          if (p < 0.0) throw ConfigError("tau distribution: negative probability");
          sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
          throw ConfigError("tau distribution: probabilities must sum to 1");
      }
      break;
    }
    case Kind::BetaMode:
      if (!(mode > 0.0) || !(mode < 1.0))
        throw ConfigError("tau distribution: beta mode must be in (0,1)");
      if (!(concentration >= 2.0))
        throw ConfigError("tau distribution: beta concentration must be >= 2");
      break;
    case Kind::Point:
      if (!(point > 0.0) || !(point < 1.0))
        throw ConfigError("tau distribution: point must be in (0,1)");
      break;
  }
}

double sample_tau(const TauDistribution& dist, Rng& rng) {
  double t = 0.5;
  switch (dist.kind) {
    case TauDistribution::Kind::Uniform:
      t = rng.uniform();
      break;
    case TauDistribution::Kind::Discrete: {
      if (dist.probs.empty()) {
        t = dist.taus[rng.next_u64() % dist.taus.size()];
      } else {
        const double u = rng.uniform();
        double acc = 0.0;
        t = dist.taus.back();
        for (std::size_t i = 0; i < dist.taus.size(); ++i) {
          acc += dist.probs[i];
          if (u <= acc) {
            t = dist.taus[i];
            break;
          }
        }
      }
      break;
    }
    case TauDistribution::Kind::BetaMode:
      t = rng.beta(dist.alpha(), dist.beta());
      break;
    case TauDistribution::Kind::Point:
      t = dist.point;
      break;
  }
  return std::clamp(t, 1e-4, 1.0 - 1e-4);
}

namespace {

constexpr std::size_t kChunk = 64;

// Accumulates one chunk's loss and gradient, example by example in row
// order. Shared by the serial and parallel drivers so both reduce
// identically.
double accumulate_chunk(const QuantileModel& model, const Dataset& data,
                        std::span<const std::size_t> rows, std::span<const double> taus,
                        std::size_t begin, std::size_t end, PredictWork& ws,
                        std::span<double> grad_acc) {
  double loss = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double y = data.labels[rows[i]];
    const double f = forward_sparse_grad(model, data.row(rows[i]), taus[i], ws);
    loss += pinball(y, f, taus[i]);
    const double coeff = pinball_subgrad_yhat(y, f, taus[i]);
    if (coeff != 0.0) {
      for (std::size_t e = 0; e < ws.grad_index.size(); ++e)
        grad_acc[ws.grad_index[e]] += coeff * ws.grad_value[e];
    }
  }
  return loss;
}

}  // namespace

BatchObjective pinball_batch_grad(const QuantileModel& model, const Dataset& data,
                                  std::span<const std::size_t> rows,
                                  std::span<const double> taus, Execution exec) {
  if (rows.empty()) throw InputError("pinball_batch_grad: empty batch");
  if (taus.size() != rows.size())
    throw InputError("pinball_batch_grad: taus/rows length mismatch");
  const std::size_t n = rows.size();
  const std::size_t P = model.layout.total;
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;

  std::vector<double> chunk_loss(nchunks, 0.0);
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
        chunk_loss[c] = accumulate_chunk(model, data, rows, taus, begin, end, ws,
                                         {chunk_grad.data() + c * P, P});
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
      chunk_loss[c] = accumulate_chunk(model, data, rows, taus, begin, end, ws,
                                       {chunk_grad.data() + c * P, P});
    }
  }

  BatchObjective out;
  out.grad.assign(P, 0.0);
  double loss = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    loss += chunk_loss[c];
    const double* g = chunk_grad.data() + c * P;
    for (std::size_t p = 0; p < P; ++p) out.grad[p] += g[p];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = loss * inv_n;
  for (double& g : out.grad) g *= inv_n;
  return out;
}

BatchObjective expected_pinball_batch(const QuantileModel& model, const Dataset& data,
                                      std::span<const std::size_t> rows,
                                      const TauDistribution& dist, Rng& rng,
                                      Execution exec) {
  std::vector<double> taus(rows.size());
  for (double& t : taus) t = sample_tau(dist, rng);
  return pinball_batch_grad(model, data, rows, taus, exec);
}

}  // namespace qlat
