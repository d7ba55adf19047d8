// Times the serial reference against the OpenMP path for the batch kernels
// and checks they agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qlat/data.hpp"
#include "qlat/loss.hpp"
#include "qlat/metrics.hpp"
#include "qlat/model.hpp"
#include "qlat/rng.hpp"
#include "qlat/train.hpp"

using namespace qlat;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

void print(const Row& r) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   %s\n", r.name, r.serial_ms,
              r.parallel_ms, r.serial_ms / r.parallel_ms,
              r.identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  SimSpec spec;
  spec.family = SimFamily::Griewank;
  spec.n = 200000;
  spec.seed = 42;

  // warm up allocators and page the data in before timing
  {
    SimSpec warm = spec;
    warm.n = 20000;
    (void)generate_sim(warm, Execution::Serial);
    (void)generate_sim(warm, Execution::Parallel);
  }

  // dataset generation
  Row gen{"generate_sim (200k rows)", 0, 0, false};
  auto t0 = std::chrono::steady_clock::now();
  const Dataset serial_data = generate_sim(spec, Execution::Serial);
  gen.serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const Dataset parallel_data = generate_sim(spec, Execution::Parallel);
  gen.parallel_ms = ms_since(t0);
  gen.identical = serial_data.features == parallel_data.features &&
                  serial_data.labels == parallel_data.labels;
  print(gen);

  // model for the gradient and metric kernels
  ModelConfig mc;
  mc.features = sim_feature_specs(spec, 10);
  mc.tau_knots = 3;
  mc.tau_calibrator_keypoints = 8;
  mc.ensemble = {{"x1", "x2"}};
  mc.lattice_knots = {5};
  QuantileModel model = init_model(mc, 7);

  std::vector<std::size_t> rows(50000);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::vector<double> taus(rows.size());
  Rng rng(3);
  for (double& t : taus) t = sample_tau(TauDistribution::uniform(), rng);

  Row grad{"pinball_batch_grad (50k)", 0, 0, false};
  t0 = std::chrono::steady_clock::now();
  const BatchObjective gs =
      pinball_batch_grad(model, serial_data, rows, taus, Execution::Serial);
  grad.serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const BatchObjective gp =
      pinball_batch_grad(model, serial_data, rows, taus, Execution::Parallel);
  grad.parallel_ms = ms_since(t0);
  grad.identical = gs.loss == gp.loss && gs.grad == gp.grad;
  print(grad);

  // metric scan
  std::vector<std::vector<double>> xs(2000);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto row = serial_data.row(i);
    xs[i].assign(row.begin(), row.end());
  }
  std::vector<double> grid(99);
  for (int i = 0; i < 99; ++i) grid[i] = (i + 1) / 100.0;
  QuantileOracle oracle = [&spec](std::span<const double> x, double tau) {
    return sim_true_quantile(spec, x, tau);
  };

  Row mse{"quantile_mse (2k x 99)", 0, 0, false};
  t0 = std::chrono::steady_clock::now();
  const double ms_serial = quantile_mse(model, oracle, xs, grid, Execution::Serial);
  mse.serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const double ms_parallel = quantile_mse(model, oracle, xs, grid, Execution::Parallel);
  mse.parallel_ms = ms_since(t0);
  mse.identical = ms_serial == ms_parallel;
  print(mse);

  Row pe{"evaluate_pinball (50k x 9)", 0, 0, false};
  std::vector<double> vtaus = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  Dataset head;  // first 50k rows
  head.schema = serial_data.schema;
  head.features.assign(serial_data.features.begin(),
                       serial_data.features.begin() + 50000 * serial_data.cols());
  head.labels.assign(serial_data.labels.begin(), serial_data.labels.begin() + 50000);
  t0 = std::chrono::steady_clock::now();
  const PinballEval ps = evaluate_pinball(model, head, vtaus, Execution::Serial);
  pe.serial_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const PinballEval pp = evaluate_pinball(model, head, vtaus, Execution::Parallel);
  pe.parallel_ms = ms_since(t0);
  pe.identical = ps.overall == pp.overall && ps.per_tau == pp.per_tau;
  print(pe);

  return 0;
}
