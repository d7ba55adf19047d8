// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracle_helpers.hpp"
#include "qlat/commands.hpp"
#include "qlat/data.hpp"
#include "qlat/loss.hpp"
#include "qlat/metrics.hpp"
#include "qlat/model.hpp"
#include "qlat/rates.hpp"
#include "qlat/rng.hpp"
#include "qlat/train.hpp"

using namespace qlat;
namespace fs = std::filesystem;

namespace {

std::vector<double> tau_grid_99() {
  std::vector<double> taus(99);
  for (int i = 0; i < 99; ++i) taus[i] = (i + 1) / 100.0;
  return taus;
}

ModelConfig mixed_config(int tau_knots) {
  ModelConfig mc;
  FeatureSpec x;
  x.name = "x";
  x.lower = -1.0;
  x.upper = 1.0;
  x.calibrator_keypoints = 5;
  FeatureSpec z;
  z.name = "z";
  z.lower = 0.0;
  z.upper = 2.0;
  z.monotone = true;
  z.calibrator_keypoints = 4;
  FeatureSpec g;
  g.name = "g";
  g.kind = FeatureKind::Categorical;
  g.categories = {"a", "b", "c"};
  mc.features = {x, z, g};
  mc.tau_knots = tau_knots;
  mc.tau_calibrator_keypoints = 4;
  mc.ensemble = {{"x", "z"}, {"g", "x"}};
  mc.lattice_knots = {3, 2};
  return mc;
}

QuantileModel feasible_random_model(const ModelConfig& mc, std::uint64_t seed) {
  QuantileModel m = init_model(mc, seed);
  Rng rng(seed ^ 0x5EEDu);
  // interior draws keep calibrated values away from the box bounds, so the
  // random model has no flat clamped regions sitting exactly on lattice knots
  for (double& p : m.params) p = rng.uniform(0.05, 0.95);
  project_model(m, 1e-10);
  for (std::size_t k = 0; k < m.lattices.size(); ++k)
    m.params[m.layout.weights + k] += 0.5;
  return m;
}

std::vector<double> random_mixed_input(Rng& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(0.0, 2.0),
          static_cast<double>(rng.next_u64() % 3)};
}

// --- criterion 1: non-crossing after a real training run -------------------

bool crit_non_crossing(std::string& detail) {
  SimSpec spec;
  spec.family = SimFamily::SineSkew;
  spec.skew_a = 1.0;
  spec.skew_b = 7.0;
  spec.n = 250;
  spec.seed = 17;
  const Dataset train = generate_sim(spec);
  SimSpec vspec = spec;
  vspec.n = 100;
  vspec.seed = 18;
  const Dataset val = generate_sim(vspec);

  ModelConfig mc;
  mc.features = sim_feature_specs(spec, 8);
  mc.tau_knots = 3;
  mc.tau_calibrator_keypoints = 6;
  mc.ensemble = {{"x1"}};
  mc.lattice_knots = {4};
  mc.non_crossing = true;

  TrainConfig tc;
  tc.epochs = 8;
  tc.batch_size = 32;
  tc.seed = 4;
  tc.learning_rate = 0.05;
  const FitResult fit_result = fit(init_model(mc, 4), train, val, tc);

  Rng rng(12);
  std::vector<std::vector<double>> xs(1000);
  for (auto& x : xs) x = {rng.uniform(-1.0, 1.0)};
  const double rate = crossing_rate(fit_result.model, xs, tau_grid_99());
  detail = "crossing_rate = " + std::to_string(rate);
  return rate == 0.0;
}

// --- criterion 2: gradients vs finite differences ---------------------------

bool crit_gradients(std::string& detail) {
  const ModelConfig mc = mixed_config(3);
  const QuantileModel m = feasible_random_model(mc, 31);
  Rng rng(32);

  auto near = [](double v, const std::vector<double>& knots) {
    for (double k : knots)
      if (std::fabs(v - k) < 1e-4) return true;
    return false;
  };
  auto is_kink_free = [&](const std::vector<double>& x, double tau) {
    if (near(tau, m.tau_calib_inputs)) return false;
    if (near(x[0], m.calib_inputs[0]) || near(x[1], m.calib_inputs[1])) return false;
    const double c = plf_evaluate(m.tau_calib_inputs, m.tau_calib_outputs(), tau);
    std::vector<double> cal(3);
    cal[0] = plf_evaluate(m.calib_inputs[0], m.feature_calib_outputs(0), x[0]);
    cal[1] = plf_evaluate(m.calib_inputs[1], m.feature_calib_outputs(1), x[1]);
    cal[2] = m.feature_calib_outputs(2)[static_cast<std::size_t>(x[2])];
    for (const auto& member : m.lattices) {
      for (std::size_t d = 0; d < member.grid.dims(); ++d) {
        const double coord =
            d + 1 == member.grid.dims() ? c : cal[member.feature_index[d]];
        if (near(coord, member.grid.knots(d))) return false;
      }
    }
    return true;
  };

  double worst_forward = 0.0;
  int checked = 0;
  int attempts = 0;
  while (checked < 100) {
    if (++attempts > 100000) {
      detail = "could not find kink-free probe points";
      return false;
    }
    const auto x = random_mixed_input(rng);
    const double tau = rng.uniform(0.02, 0.98);
    if (!is_kink_free(x, tau)) continue;
    ++checked;
    const ForwardResult fr = forward_with_grad(m, x, tau);
    const auto fd = oracle::fd_gradient(
        [&](const std::vector<double>& p) {
          QuantileModel copy = m;
          copy.params = p;
          return predict(copy, x, tau);
        },
        m.params, 1e-5);
    worst_forward = std::max(worst_forward, oracle::max_rel_err(fr.grad, fd, 1e-5));
  }

  // expected pinball batch with frozen taus
  Dataset data;
  data.schema.features.push_back({"x", FeatureKind::Continuous, {}, {}});
  data.schema.features.push_back({"z", FeatureKind::Continuous, {}, {}});
  data.schema.features.push_back({"g", FeatureKind::Categorical, {"a", "b", "c"}, {}});
  data.schema.label = "y";
  std::vector<std::size_t> rows;
  std::vector<double> taus;
  attempts = 0;
  while (rows.size() < 64) {
    if (++attempts > 100000) {
      detail = "could not assemble a kink-free batch";
      return false;
    }
    const auto x = random_mixed_input(rng);
    const double tau = rng.uniform(0.02, 0.98);
    if (!is_kink_free(x, tau)) continue;
    const double y = rng.uniform(-2.0, 2.0);
    if (std::fabs(y - predict(m, x, tau)) < 1e-3) continue;  // pinball kink
    data.features.insert(data.features.end(), x.begin(), x.end());
    data.labels.push_back(y);
    rows.push_back(rows.size());
    taus.push_back(tau);
  }
  const BatchObjective obj = pinball_batch_grad(m, data, rows, taus, Execution::Serial);
  const auto fd_batch = oracle::fd_gradient(
      [&](const std::vector<double>& p) {
        QuantileModel copy = m;
        copy.params = p;
        return pinball_batch_grad(copy, data, rows, taus, Execution::Serial).loss;
      },
      m.params, 1e-5);
  const double worst_batch = oracle::max_rel_err(obj.grad, fd_batch, 1e-5);

  detail = "max rel err forward = " + std::to_string(worst_forward) +
           ", batch = " + std::to_string(worst_batch);
  return worst_forward < 1e-5 && worst_batch < 1e-5;
}

// --- criterion 3: pinball minimizer equals the sample quantile --------------

bool crit_pinball_minimizer(std::string& detail) {
  Rng rng(41);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> ys(51);
    for (double& y : ys) y = rng.uniform(-5.0, 5.0);
    for (int k = 1; k <= 9; ++k) {
      const double tau = k / 10.0;
      const double diff =
          std::fabs(oracle::pinball_argmin(ys, tau) - sample_quantile(ys, tau));
      worst = std::max(worst, diff);
    }
  }
  detail = "max |argmin - sample_quantile| = " + std::to_string(worst);
  return worst < 1e-6;
}

// --- criterion 4: location-scale residual ------------------------------------

bool crit_location_scale(std::string& detail) {
  Rng rng(51);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const QuantileModel m = feasible_random_model(mixed_config(2), 500 + trial);
    std::vector<std::vector<double>> xs(10);
    for (auto& x : xs) x = random_mixed_input(rng);
    std::vector<double> taus(10);
    for (int i = 0; i < 10; ++i) taus[i] = (i + 0.5) / 10.0;
    const auto r = location_scale_residual(m, xs, taus);
    worst = std::max(worst, r.max_residual);
  }
  detail = "max residual = " + std::to_string(worst);
  return worst < 1e-9;
}

// --- criterion 5: projection against the brute-force oracle -----------------

bool crit_projection(std::string& detail) {
  Rng rng(61);
  auto pairs_for = [](const Grid& g, const MonotoneSpec& spec) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t d : spec.dims) {
      const std::size_t len = g.knot_count(d);
      const std::size_t stride = g.stride(d);
      const std::size_t block = stride * len;
      for (std::size_t outer = 0; outer < g.size(); outer += block)
        for (std::size_t inner = 0; inner < stride; ++inner)
          for (std::size_t k = 0; k + 1 < len; ++k)
            pairs.emplace_back(outer + inner + k * stride,
                               outer + inner + (k + 1) * stride);
    }
    return pairs;
  };
  const Grid g22({{0.0, 1.0}, {0.0, 1.0}});
  const Grid g33({{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}});
  double worst_match = 0.0, worst_idem = 0.0;
  bool all_monotone = true;
  for (const Grid* g : {&g22, &g33}) {
    for (const MonotoneSpec& spec :
         {MonotoneSpec{{0}}, MonotoneSpec{{0, 1}}}) {
      const auto pairs = pairs_for(*g, spec);
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> theta(g->size());
        for (double& t : theta) t = rng.uniform(-1.0, 1.0);
        const auto got = project_monotone(*g, theta, spec);
        const auto want = oracle::qp_project(theta, pairs);
        for (std::size_t i = 0; i < got.size(); ++i)
          worst_match = std::max(worst_match, std::fabs(got[i] - want[i]));
        const auto twice = project_monotone(*g, got, spec);
        for (std::size_t i = 0; i < got.size(); ++i)
          worst_idem = std::max(worst_idem, std::fabs(twice[i] - got[i]));
        all_monotone = all_monotone && check_monotone(*g, got, spec, 1e-9).ok;
      }
    }
  }
  detail = "max |dykstra - qp| = " + std::to_string(worst_match) +
           ", idempotence gap = " + std::to_string(worst_idem);
  return worst_match < 1e-6 && worst_idem < 1e-12 && all_monotone;
}

// --- criterion 6: unconditional estimation against classical estimators ------

struct UqeRow {
  std::string estimator;
  double concentration = 0.0;
  double mse = 0.0;
};

std::vector<UqeRow> run_uqe(const fs::path& dir) {
  nlohmann::json cfg;
  cfg["seed"] = 2024;
  // short-budget training regularizes like the validated epoch counts the
  // experiments use; see README for the protocol
  cfg["uqe"] = {{"lambda", 1.0},
                {"n", 51},
                {"repeats", 1000},
                {"taus", {0.5}},
                {"concentrations", {10.0, 20.0, 31.6, 50.0, 100.0, 316.0, 1000.0, 10000.0}},
                {"estimators", {"sample", "hd", "linear"}},
                {"epochs", 30},
                {"batch_size", 10},
                {"learning_rate", 0.003}};
  fs::create_directories(dir);
  const std::string cfg_path = (dir / "uqe_config.json").string();
  {
    std::ofstream out(cfg_path);
    out << cfg.dump(2);
  }
  CommandIO io{cfg_path, dir.string(), std::nullopt};
  if (cmd_uqe(io) != 0) return {};
  std::vector<UqeRow> rows;
  std::ifstream in((dir / "uqe.csv").string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("estimator", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    UqeRow row;
    row.estimator = cells[0];
    row.concentration = cells[2].empty() ? 0.0 : std::stod(cells[2]);
    row.mse = std::stod(cells[3]);
    rows.push_back(row);
  }
  return rows;
}

bool crit_unconditional(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "qlat_acceptance_uqe";
  fs::remove_all(dir);
  const auto rows = run_uqe(dir);
  if (rows.empty()) {
    detail = "uqe command failed";
    return false;
  }
  double sample_mse = -1.0, hd_mse = -1.0, linear_highc = -1.0;
  double best_mid = 1e300;
  for (const auto& row : rows) {
    if (row.estimator == "sample") sample_mse = row.mse;
    if (row.estimator == "hd") hd_mse = row.mse;
    if (row.estimator == "linear") {
      if (row.concentration >= 10.0 && row.concentration <= 1000.0)
        best_mid = std::min(best_mid, row.mse);
      if (row.concentration == 10000.0) linear_highc = row.mse;
    }
  }
  const bool beats_hd = best_mid <= hd_mse;
  const bool tracks_sample = std::fabs(linear_highc - sample_mse) <= 0.2 * sample_mse;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "sample=%.5f hd=%.5f linear(best mid C)=%.5f linear(C=1e4)=%.5f",
                sample_mse, hd_mse, best_mid, linear_highc);
  detail = buf;
  return beats_hd && tracks_sample;
}

// --- criterion 7: Beta-concentration sweep direction ------------------------

struct SweepCase {
  int epochs;
  int batch;
  int calibrator_keypoints;
  int tau_calibrator_keypoints;
};

double median_mse_once(double a, double b, int n, double concentration,
                       std::uint64_t seed, const SweepCase& sc) {
  SimSpec spec;
  spec.family = SimFamily::SineSkew;
  spec.skew_a = a;
  spec.skew_b = b;
  spec.noise_scale = 2.0;
  spec.n = n;
  spec.seed = Rng::stream(seed, 1).next_u64();
  const Dataset train = generate_sim(spec);
  SimSpec vspec = spec;
  vspec.n = 500;
  vspec.seed = Rng::stream(seed, 2).next_u64();
  const Dataset val = generate_sim(vspec);

  ModelConfig mc;
  mc.features = sim_feature_specs(spec, sc.calibrator_keypoints);
  mc.tau_knots = 2;
  mc.tau_calibrator_keypoints = sc.tau_calibrator_keypoints;
  mc.ensemble = {{"x1"}};
  mc.lattice_knots = {2};

  TrainConfig tc;
  tc.epochs = sc.epochs;
  tc.batch_size = sc.batch;
  tc.seed = seed;
  tc.learning_rate = 0.03;
  tc.tau_dist = TauDistribution::beta_mode(0.5, concentration);
  // each arm validates under its own sampling law's taus of interest
  if (concentration >= 5000.0) {
    tc.validation_taus = {0.5};
  } else {
    tc.validation_taus.clear();
    for (int i = 1; i <= 19; ++i) tc.validation_taus.push_back(i / 20.0);
  }
  const FitResult result = fit(init_model(mc, seed), train, val, tc);

  double mse = 0.0;
  const int grid = 201;
  for (int i = 0; i < grid; ++i) {
    const std::vector<double> x = {-1.0 + 2.0 * i / (grid - 1.0)};
    const double err =
        predict(result.model, x, 0.5) - sim_true_quantile(spec, x, 0.5);
    mse += err * err;
  }
  return mse / grid;
}

bool crit_beta_sweep(std::string& detail) {
  const int repeats = 100;
  auto sweep = [&](double a, double b, int n, double conc, const SweepCase& sc) {
    std::vector<double> mses(repeats);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int r = 0; r < repeats; ++r)
      mses[r] = median_mse_once(a, b, n, conc, 7000 + 13 * r, sc);
    return mean_ci(mses);
  };

  const SweepCase low_case{100, 25, 10, 4};
  const auto [low_c2, low_c2_half] = sweep(1.0, 1.0, 100, 2.0, low_case);
  const auto [low_c4, low_c4_half] = sweep(1.0, 1.0, 100, 10000.0, low_case);
  const bool low_noise_ok = low_c2 + low_c2_half < low_c4 - low_c4_half;

  const SweepCase skew_case{150, 50, 6, 3};
  const auto [skew_c2, skew_c2_half] = sweep(1.0, 7.0, 1000, 2.0, skew_case);
  const auto [skew_c4, skew_c4_half] = sweep(1.0, 7.0, 1000, 10000.0, skew_case);
  const bool skew_ok = skew_c4 + skew_c4_half < skew_c2 - skew_c2_half;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "(1,1) n=100: C2 %.4f+-%.4f vs C1e4 %.4f+-%.4f | (1,7) n=1000: C2 "
                "%.4f+-%.4f vs C1e4 %.4f+-%.4f",
                low_c2, low_c2_half, low_c4, low_c4_half, skew_c2, skew_c2_half, skew_c4,
                skew_c4_half);
  detail = buf;
  return low_noise_ok && skew_ok;
}

// --- criterion 8: rate constraints help subset calibration ------------------

Dataset subset_noise_data(int n, std::uint64_t seed) {
  // three x-identifiable subsets with different noise scale and skew
  Dataset d;
  d.schema.features.push_back({"x", FeatureKind::Continuous, {}, {}});
  d.schema.label = "y";
  d.schema.subset_column = "region";
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, i);
    const double x = rng.uniform();
    double scale, a, b;
    const char* region;
    if (x < 1.0 / 3.0) {
      scale = 0.5;
      a = 1.0;
      b = 1.0;
      region = "A";
    } else if (x < 2.0 / 3.0) {
      scale = 1.0;
      a = 1.0;
      b = 4.0;
      region = "B";
    } else {
      scale = 2.0;
      a = 4.0;
      b = 1.0;
      region = "C";
    }
    const double u = rng.uniform();
    const double z = std::fabs(rng.normal());
    const double eps = u < b / (a + b) ? b * scale * z : -a * scale * z;
    d.features.push_back(x);
    d.labels.push_back(eps);
    d.subset_ids.push_back(region);
  }
  return d;
}

std::vector<RateSubset> region_subsets(const Dataset& data) {
  std::vector<RateSubset> subsets;
  for (const std::string region : {"A", "B", "C"}) {
    for (double tau : {0.5, 0.9}) {
      subsets.push_back({region, data.subset_rows(region), tau});
    }
  }
  return subsets;
}

bool crit_rate_constraints(std::string& detail) {
  const double eps = 0.02;
  int wins = 0;
  bool train_ok = true;
  double worst_train = 0.0;
  for (int s = 0; s < 10; ++s) {
    const std::uint64_t seed = 3000 + 97 * s;
    const Dataset train = subset_noise_data(3000, Rng::stream(seed, 1).next_u64());
    const Dataset val = subset_noise_data(1000, Rng::stream(seed, 2).next_u64());
    const Dataset test = subset_noise_data(3000, Rng::stream(seed, 3).next_u64());

    ModelConfig mc;
    FeatureSpec x;
    x.name = "x";
    x.lower = 0.0;
    x.upper = 1.0;
    x.calibrator_keypoints = 6;
    mc.features = {x};
    mc.tau_knots = 2;
    mc.tau_calibrator_keypoints = 6;
    mc.ensemble = {{"x"}};
    mc.lattice_knots = {4};

    TrainConfig tc;
    tc.epochs = 60;
    tc.batch_size = 100;
    tc.seed = seed;
    tc.learning_rate = 0.05;
    tc.tau_dist = TauDistribution::discrete({0.5, 0.9});
    tc.validation_taus = {0.5, 0.9};

    const FitResult plain = fit(init_model(mc, seed), train, val, tc);

    TrainConfig ctc = tc;
    ctc.multiplier_lr = 0.02;
    ctc.temperature_factor = 0.3;
    for (const std::string region : {"A", "B", "C"}) {
      for (double tau : {0.5, 0.9}) {
        RateConstraintSpec spec;
        spec.subset_column = "region";
        spec.subset_value = region;
        spec.tau_s = tau;
        spec.eps_minus = eps;
        spec.eps_plus = eps;
        ctc.constraints.push_back(spec);
      }
    }
    const FitResult constrained = fit(init_model(mc, seed), train, val, ctc);

    const double train_viol =
        max_quantile_violation(constrained.model, train, region_subsets(train));
    worst_train = std::max(worst_train, train_viol);
    if (train_viol > eps + 0.02) train_ok = false;

    const auto test_subsets = region_subsets(test);
    const double test_constrained =
        max_quantile_violation(constrained.model, test, test_subsets);
    const double test_plain = max_quantile_violation(plain.model, test, test_subsets);
    if (test_constrained < test_plain) ++wins;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "wins %d/10, worst constrained train violation %.4f",
                wins, worst_train);
  detail = buf;
  return wins >= 8 && train_ok;
}

// --- criterion 9: Harrell-Davis ----------------------------------------------

bool crit_harrell_davis(std::string& detail) {
  double worst_sum = 0.0;
  for (std::size_t n : {1, 2, 3, 5, 10, 31, 100, 250, 500, 750, 1000}) {
    for (double tau : {0.01, 0.1, 0.5, 0.9, 0.99}) {
      const auto w = harrell_davis_weights(n, tau);
      double sum = 0.0;
      for (double v : w) sum += v;
      worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
    }
  }
  const double hd_median =
      harrell_davis(std::vector<double>{0.0, 0.0, 1.0}, 0.5);
  const double hd_err = std::fabs(hd_median - 7.0 / 27.0);

  Rng rng(71);
  double worst_affine = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> ys(41);
    for (double& y : ys) y = rng.normal();
    const double tau = rng.uniform(0.05, 0.95);
    const double a = rng.uniform(-5.0, 5.0);
    const double b = rng.uniform(0.1, 3.0);
    std::vector<double> trans(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) trans[i] = a + b * ys[i];
    worst_affine = std::max(worst_affine,
                            std::fabs(harrell_davis(trans, tau) -
                                      (a + b * harrell_davis(ys, tau))));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "|sum w - 1| <= %.2e, |HD({0,0,1},.5) - 7/27| = %.2e, affine gap %.2e",
                worst_sum, hd_err, worst_affine);
  detail = buf;
  return worst_sum < 1e-10 && hd_err < 1e-9 && worst_affine < 1e-9;
}

// --- criterion 10: bit-identical training runs -------------------------------

bool crit_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "qlat_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  nlohmann::json cfg;
  cfg["seed"] = 99;
  cfg["data"] = {{"source", "sim"},
                 {"sim", {{"family", "sine-skew"}, {"a", 1.0}, {"b", 7.0}, {"n", 150}}},
                 {"n_val", 80},
                 {"n_test", 80}};
  cfg["model"] = {{"tau_knots", 3},
                  {"tau_calibrator_keypoints", 5},
                  {"calibrator_keypoints", 6},
                  {"lattice_knots", 3}};
  cfg["train"] = {{"epochs", 5}, {"batch_size", 25}, {"learning_rate", 0.05}};
  const std::string cfg_path = (dir / "config.json").string();
  {
    std::ofstream out(cfg_path);
    out << cfg.dump(2);
  }
  CommandIO io1{cfg_path, (dir / "run1").string(), std::nullopt};
  CommandIO io2{cfg_path, (dir / "run2").string(), std::nullopt};
  if (cmd_train(io1) != 0 || cmd_train(io2) != 0) {
    detail = "training command failed";
    return false;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "run1/model.json");
  const std::string b = slurp(dir / "run2/model.json");
  const bool models_match = !a.empty() && a == b;
  const bool history_match =
      slurp(dir / "run1/history.csv") == slurp(dir / "run2/history.csv");
  detail = models_match ? "model files identical" : "model files differ";
  return models_match && history_match;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "non-crossing guarantee after training", crit_non_crossing},
      {2, "gradients match finite differences (1e-5)", crit_gradients},
      {3, "pinball minimizer equals sample quantile (1e-6)", crit_pinball_minimizer},
      {4, "location-scale residual < 1e-9 for two-knot models", crit_location_scale},
      {5, "monotone projection matches brute force (1e-6)", crit_projection},
      {6, "unconditional estimation tracks sample/HD", crit_unconditional},
      {7, "Beta concentration sweep directions", crit_beta_sweep},
      {8, "rate constraints improve subset calibration", crit_rate_constraints},
      {9, "Harrell-Davis weights and equivariance", crit_harrell_davis},
      {10, "bit-identical reruns", crit_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s — %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id,
                c.name, detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed;
}
