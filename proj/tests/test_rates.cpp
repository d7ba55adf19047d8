#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "qlat/rates.hpp"
#include "qlat/train.hpp"

using namespace qlat;

namespace {

QuantileModel tau_only_model(std::uint64_t seed = 1) {
  ModelConfig mc;
  mc.tau_knots = 2;
  mc.tau_calibrator_keypoints = 2;
  mc.ensemble = {{}};
  return init_model(mc, seed);
}

Dataset labels_only(std::vector<double> ys) {
  Dataset d;
  d.schema.label = "y";
  d.labels = std::move(ys);
  return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

}  // namespace

TEST_CASE("empirical_rate: extremes") {
  QuantileModel m = tau_only_model();
  const Dataset data = labels_only({0.0, 1.0, 2.0, 3.0});
  const auto rows = all_rows(data);
  m.params[m.layout.bias] = 1e9;
  CHECK(empirical_rate(m, data, rows, 0.5) == 1.0);
  m.params[m.layout.bias] = -1e9;
  CHECK(empirical_rate(m, data, rows, 0.5) == 0.0);
  CHECK_THROWS_AS((void)empirical_rate(m, data, {}, 0.5), ConfigError);
}

TEST_CASE("empirical_rate: calibrated predictions hit the target within 2/sqrt(N)") {
  // y ~ U(0,1); a model predicting the true quantile tau has rate ~ tau
  const int N = 10000;
  Rng rng(12);
  std::vector<double> ys(N);
  for (double& y : ys) y = rng.uniform();
  const Dataset data = labels_only(std::move(ys));
  const auto rows = all_rows(data);
  for (double tau : {0.25, 0.5, 0.9}) {
    QuantileModel m = tau_only_model();
    m.params[m.layout.weights] = 0.0;
    m.params[m.layout.bias] = tau;  // true U(0,1) quantile
    const double rate = empirical_rate(m, data, rows, tau);
    CHECK(std::fabs(rate - tau) < 2.0 / std::sqrt(static_cast<double>(N)));
  }
}

TEST_CASE("violation: inside, below, above") {
  RateConstraintSpec spec;
  spec.tau_s = 0.9;
  spec.eps_minus = 0.05;
  spec.eps_plus = 0.05;
  auto v = violation(spec, 0.9);
  CHECK(v.first == 0.0);
  CHECK(v.second == 0.0);
  v = violation(spec, 0.8);
  CHECK(v.first == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(v.second == 0.0);
  v = violation(spec, 1.0);
  CHECK(v.first == 0.0);
  CHECK(v.second == doctest::Approx(0.05).epsilon(1e-12));
  // zero exactly on the slack interval
  for (double r = 0.85; r <= 0.951; r += 0.01) {
    const auto z = violation(spec, r);
    CHECK(z.first == 0.0);
    CHECK(z.second == 0.0);
  }
}

TEST_CASE("surrogate rate: sigmoid(0) = 0.5 when predictions equal labels") {
  QuantileModel m = tau_only_model();
  m.params[m.layout.weights] = 0.0;
  m.params[m.layout.bias] = 2.0;
  const Dataset data = labels_only({2.0, 2.0, 2.0});
  const auto sr = surrogate_rate(m, data, all_rows(data), 0.5, 0.1);
  CHECK(sr.rate == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("surrogate rate approaches the indicator rate as temperature -> 0") {
  QuantileModel m = tau_only_model(3);
  Rng rng(13);
  std::vector<double> ys(50);
  for (double& y : ys) y = rng.uniform(-1.0, 1.0);
  const Dataset data = labels_only(std::move(ys));
  const auto rows = all_rows(data);
  const double hard = empirical_rate(m, data, rows, 0.5);
  const auto soft = surrogate_rate(m, data, rows, 0.5, 1e-5);
  CHECK(std::fabs(soft.rate - hard) <= 1e-3);
}

TEST_CASE("surrogate rate gradient matches finite differences") {
  ModelConfig mc;
  FeatureSpec x;
  x.name = "x";
  x.lower = 0.0;
  x.upper = 1.0;
  x.calibrator_keypoints = 4;
  mc.features = {x};
  mc.tau_knots = 2;
  mc.tau_calibrator_keypoints = 3;
  mc.ensemble = {{"x"}};
  mc.lattice_knots = {3};
  QuantileModel m = init_model(mc, 4);
  Rng rng(14);
  for (double& p : m.params) p = rng.uniform(0.1, 0.9);
  project_model(m, 1e-10);

  Dataset data;
  data.schema.features.push_back({"x", FeatureKind::Continuous, {}, {}});
  for (int i = 0; i < 20; ++i) {
    data.features.push_back(rng.uniform(0.0, 1.0));
    data.labels.push_back(rng.uniform(-0.5, 1.5));
  }
  const auto rows = all_rows(data);
  const double temp = 0.25;
  const auto sr = surrogate_rate(m, data, rows, 0.7, temp);
  const auto fd = oracle::fd_gradient(
      [&](const std::vector<double>& p) {
        QuantileModel copy = m;
        copy.params = p;
        return surrogate_rate(copy, data, rows, 0.7, temp).rate;
      },
      m.params, 1e-6);
  CHECK(oracle::max_rel_err(sr.grad, fd, 1e-4) < 1e-5);
}

TEST_CASE("lagrangian step with zero multipliers equals the unconstrained step") {
  const Dataset data = labels_only({0.0, 1.0, 2.0, 3.0, 4.0});
  const auto rows = all_rows(data);
  const auto dist = TauDistribution::uniform();

  // slack constraint that stays satisfied: huge slacks keep lambdas at zero
  RateConstraintSpec spec;
  spec.tau_s = 0.5;
  spec.eps_minus = 1.0;
  spec.eps_plus = 1.0;

  QuantileModel constrained = tau_only_model(7);
  QuantileModel plain = tau_only_model(7);
  const std::vector<RateConstraintSpec> specs = {spec};
  ConstraintSet cs = ConstraintSet::resolve(data, specs, 0.1);
  MultiplierState ms;
  ms.lambda_lower.assign(1, 0.0);
  ms.lambda_upper.assign(1, 0.0);
  AdamState adam_a(constrained.params.size(), 0.01);
  AdamState adam_b(plain.params.size(), 0.01);
  Rng rng_a(5), rng_b(5);

  for (int step = 0; step < 10; ++step) {
    lagrangian_step(constrained, data, rows, dist, rng_a, cs, ms, adam_a, 1e-9,
                    Execution::Serial);
    const auto obj =
        expected_pinball_batch(plain, data, rows, dist, rng_b, Execution::Serial);
    adam_step(plain.params, obj.grad, adam_b);
    project_model(plain, 1e-9);
  }
  CHECK(constrained.params == plain.params);
  CHECK(ms.lambda_lower[0] == 0.0);
  CHECK(ms.lambda_upper[0] == 0.0);
}

TEST_CASE("a large upper multiplier pushes subset predictions down") {
  // bias-only model: the constraint term dominates and must lower f
  QuantileModel m = tau_only_model(8);
  m.params[m.layout.weights] = 0.0;
  m.params[m.layout.bias] = 5.0;
  const Dataset data = labels_only({0.0, 1.0, 2.0});
  const auto rows = all_rows(data);

  RateConstraintSpec spec;
  spec.tau_s = 0.5;
  spec.eps_minus = 0.0;
  spec.eps_plus = 0.0;
  const std::vector<RateConstraintSpec> specs = {spec};
  ConstraintSet cs = ConstraintSet::resolve(data, specs, 1.0);
  MultiplierState ms;
  ms.lambda_lower.assign(1, 0.0);
  ms.lambda_upper.assign(1, 100.0);  // forced large
  AdamState adam(m.params.size(), 0.01);
  Rng rng(6);
  const double before = predict(m, {}, 0.5);
  lagrangian_step(m, data, rows, TauDistribution::point_mass(0.5), rng, cs, ms, adam, 1e-9,
                  Execution::Serial);
  CHECK(predict(m, {}, 0.5) < before);
}

TEST_CASE("multipliers stay nonnegative across many steps") {
  QuantileModel m = tau_only_model(9);
  Rng data_rng(15);
  std::vector<double> ys(40);
  for (double& y : ys) y = data_rng.uniform(-1.0, 1.0);
  const Dataset data = labels_only(std::move(ys));
  const auto rows = all_rows(data);

  RateConstraintSpec tight;
  tight.tau_s = 0.9;
  tight.eps_minus = 0.01;
  tight.eps_plus = 0.01;
  RateConstraintSpec loose;
  loose.tau_s = 0.5;
  loose.eps_minus = 0.2;
  loose.eps_plus = 0.2;
  const std::vector<RateConstraintSpec> specs = {tight, loose};
  ConstraintSet cs = ConstraintSet::resolve(data, specs, 0.05);
  MultiplierState ms;
  ms.lambda_lower.assign(2, 0.0);
  ms.lambda_upper.assign(2, 0.0);
  ms.multiplier_lr = 0.05;
  AdamState adam(m.params.size(), 0.01);
  Rng rng(7);
  for (int step = 0; step < 1000; ++step) {
    lagrangian_step(m, data, rows, TauDistribution::uniform(), rng, cs, ms, adam, 1e-9,
                    Execution::Serial);
    for (double l : ms.lambda_lower) CHECK(l >= 0.0);
    for (double l : ms.lambda_upper) CHECK(l >= 0.0);
  }
}

TEST_CASE("best_iterate selection") {
  // single iterate
  const std::vector<IterateRecord> only = {{4, 1.0, 0.1}};
  CHECK(best_iterate(only) == 4);
  // feasibility dominates
  const std::vector<IterateRecord> two = {{0, 1.0, 0.0}, {1, 0.5, 0.2}};
  CHECK(best_iterate(two, 0.01) == 0);
  // all infeasible: min violation wins
  const std::vector<IterateRecord> inf = {{0, 1.0, 0.3}, {1, 2.0, 0.2}};
  CHECK(best_iterate(inf, 0.01) == 1);
  // default tolerance: min violation + 0.005 window, then lowest objective
  const std::vector<IterateRecord> win = {{0, 3.0, 0.100}, {1, 1.0, 0.104}, {2, 0.5, 0.2}};
  CHECK(best_iterate(win) == 1);
  CHECK_THROWS_AS(best_iterate(std::vector<IterateRecord>{}), InputError);
}

TEST_CASE("empirical_rate monotonicity in labels and predictions") {
  QuantileModel m = tau_only_model(11);
  Rng rng(16);
  std::vector<double> ys(60);
  for (double& y : ys) y = rng.uniform(-1.0, 1.0);
  Dataset data = labels_only(ys);
  const auto rows = all_rows(data);
  const double base = empirical_rate(m, data, rows, 0.6);
  // raising every label can only lower the rate
  Dataset shifted = data;
  for (double& y : shifted.labels) y += 0.25;
  CHECK(empirical_rate(m, shifted, rows, 0.6) <= base);
  // raising predictions pointwise can only raise the rate
  QuantileModel up = m;
  up.params[up.layout.bias] += 0.25;
  CHECK(empirical_rate(up, data, rows, 0.6) >= base);
}

TEST_CASE("an auxiliary constraint dataset drives the logged violations") {
  // train labels sit near the initial predictions; the auxiliary labels sit
  // far above them, so constraints resolved on the aux set stay violated
  Rng rng(17);
  Dataset train;
  train.schema.label = "y";
  for (int i = 0; i < 80; ++i) train.labels.push_back(rng.uniform(0.0, 1.0));
  Dataset aux = train;
  for (double& y : aux.labels) y = 100.0;

  ModelConfig mc;
  mc.tau_knots = 2;
  mc.tau_calibrator_keypoints = 2;
  mc.ensemble = {{}};

  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 20;
  tc.seed = 5;
  tc.learning_rate = 0.01;
  RateConstraintSpec spec;
  spec.tau_s = 0.5;
  spec.eps_minus = 0.05;
  spec.eps_plus = 0.05;
  tc.constraints = {spec};

  const FitResult on_train = fit(init_model(mc, 5), train, train, tc);
  const FitResult on_aux = fit(init_model(mc, 5), train, train, tc, &aux);
  // rate on the aux set is 0, so the lower violation is tau - eps = 0.45
  CHECK(on_aux.history.back().max_violation > 0.4);
  CHECK(on_train.history.back().max_violation < 0.2);
}

TEST_CASE("disjoint subsets evaluate independently") {
  QuantileModel m = tau_only_model(10);
  Dataset data;
  data.schema.label = "y";
  data.schema.subset_column = "g";
  data.labels = {0.0, 1.0, 10.0, 11.0};
  data.subset_ids = {"a", "a", "b", "b"};
  const auto rows_a = data.subset_rows("a");
  const auto rows_b = data.subset_rows("b");
  m.params[m.layout.weights] = 0.0;
  m.params[m.layout.bias] = 5.0;  // above all of a, below all of b
  CHECK(empirical_rate(m, data, rows_a, 0.5) == 1.0);
  CHECK(empirical_rate(m, data, rows_b, 0.5) == 0.0);
  const auto rows_all = data.subset_rows("all");
  CHECK(empirical_rate(m, data, rows_all, 0.5) == 0.5);
}
