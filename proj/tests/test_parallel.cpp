// The OpenMP paths must agree bit-for-bit with the serial reference at any
// thread count: partial results are chunked and reduced in a fixed order.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qlat/data.hpp"
#include "qlat/loss.hpp"
#include "qlat/metrics.hpp"
#include "qlat/rates.hpp"
#include "qlat/rng.hpp"
#include "qlat/train.hpp"

using namespace qlat;

namespace {

struct Fixture {
  QuantileModel model;
  Dataset data;
  std::vector<std::size_t> rows;
  std::vector<double> taus;
  std::vector<std::vector<double>> xs;
  std::vector<double> tau_grid;

  Fixture() {
    SimSpec spec;
    spec.family = SimFamily::SineSkew;
    spec.skew_a = 1.0;
    spec.skew_b = 3.0;
    spec.n = 700;  // not a multiple of the chunk size
    spec.seed = 3;
    data = generate_sim(spec);

    ModelConfig mc;
    mc.features = sim_feature_specs(spec, 6);
    mc.tau_knots = 3;
    mc.tau_calibrator_keypoints = 5;
    mc.ensemble = {{"x1"}};
    mc.lattice_knots = {4};
    model = init_model(mc, 5);
    Rng rng(6);
    for (double& p : model.params) p = rng.uniform(0.0, 1.0);
    project_model(model, 1e-10);

    rows.resize(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    taus.resize(rows.size());
    for (double& t : taus) t = rng.uniform(0.01, 0.99);
    for (int i = 0; i < 97; ++i) xs.push_back({-1.0 + 2.0 * i / 96.0});
    for (int i = 0; i < 99; ++i) tau_grid.push_back((i + 1) / 100.0);
  }
};

}  // namespace

TEST_CASE("serial and parallel kernels agree bitwise at several thread counts") {
  const Fixture f;

  const BatchObjective serial_grad =
      pinball_batch_grad(f.model, f.data, f.rows, f.taus, Execution::Serial);
  const SurrogateRate serial_sr =
      surrogate_rate(f.model, f.data, f.rows, 0.7, 0.1, Execution::Serial);
  const double serial_rate = empirical_rate(f.model, f.data, f.rows, 0.7, Execution::Serial);
  const double serial_cross =
      crossing_rate(f.model, f.xs, f.tau_grid, Execution::Serial);
  QuantileOracle oracle = [](std::span<const double> x, double tau) {
    return x[0] + tau;
  };
  const double serial_mse =
      quantile_mse(f.model, oracle, f.xs, f.tau_grid, Execution::Serial);
  const PinballEval serial_eval =
      evaluate_pinball(f.model, f.data, {f.tau_grid.data(), 9}, Execution::Serial);
  SimSpec gspec;
  gspec.family = SimFamily::Griewank;
  gspec.n = 997;
  gspec.seed = 8;
  const Dataset serial_sim = generate_sim(gspec, Execution::Serial);

  for (int threads : {1, 2, 4}) {
#ifdef _OPENMP
    omp_set_num_threads(threads);
#else
    if (threads > 1) continue;
#endif
    const BatchObjective pg =
        pinball_batch_grad(f.model, f.data, f.rows, f.taus, Execution::Parallel);
    CHECK(pg.loss == serial_grad.loss);
    CHECK(pg.grad == serial_grad.grad);

    const SurrogateRate sr =
        surrogate_rate(f.model, f.data, f.rows, 0.7, 0.1, Execution::Parallel);
    CHECK(sr.rate == serial_sr.rate);
    CHECK(sr.grad == serial_sr.grad);

    CHECK(empirical_rate(f.model, f.data, f.rows, 0.7, Execution::Parallel) == serial_rate);
    CHECK(crossing_rate(f.model, f.xs, f.tau_grid, Execution::Parallel) == serial_cross);
    CHECK(quantile_mse(f.model, oracle, f.xs, f.tau_grid, Execution::Parallel) == serial_mse);

    const PinballEval pe =
        evaluate_pinball(f.model, f.data, {f.tau_grid.data(), 9}, Execution::Parallel);
    CHECK(pe.overall == serial_eval.overall);
    CHECK(pe.per_tau == serial_eval.per_tau);

    const Dataset sim = generate_sim(gspec, Execution::Parallel);
    CHECK(sim.features == serial_sim.features);
    CHECK(sim.labels == serial_sim.labels);
  }
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
}

TEST_CASE("training is identical under serial and parallel execution") {
  const Fixture f;
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 50;
  tc.seed = 11;
  tc.learning_rate = 0.02;

  TrainConfig serial_tc = tc;
  serial_tc.exec = Execution::Serial;
  TrainConfig parallel_tc = tc;
  parallel_tc.exec = Execution::Parallel;

  const FitResult a = fit(f.model, f.data, f.data, serial_tc);
  const FitResult b = fit(f.model, f.data, f.data, parallel_tc);
  CHECK(a.model.params == b.model.params);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    CHECK(a.history[e].train_loss == b.history[e].train_loss);
    CHECK(a.history[e].val_metric == b.history[e].val_metric);
  }
}
