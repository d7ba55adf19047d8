#include "qlat/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qlat/common.hpp"
#include "qlat/data.hpp"
#include "qlat/metrics.hpp"
#include "qlat/model.hpp"
#include "qlat/rng.hpp"
#include "qlat/train.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

namespace fs = std::filesystem;
using nlohmann::json;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

std::string config_hash_hex(const json& config) { return to_hex(fnv1a(config.dump())); }

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return Rng::stream(seed, salt).next_u64();
}

std::uint64_t config_seed(const json& cfg, const CommandIO& io) {
  if (io.seed) return *io.seed;
  return cfg.value("seed", std::uint64_t{1});
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus(99);
  for (int i = 0; i < 99; ++i) taus[i] = (i + 1) / 100.0;
  return taus;
}

// --- parsing ---------------------------------------------------------------

TauDistribution parse_tau_dist(const json& j) {
  if (j.is_null()) return TauDistribution::uniform();
  const std::string type = j.value("type", "uniform");
  if (type == "uniform") return TauDistribution::uniform();
  if (type == "discrete")
    return TauDistribution::discrete(j.at("taus").get<std::vector<double>>(),
                                     j.value("probs", std::vector<double>{}));
  if (type == "beta")
    return TauDistribution::beta_mode(j.at("mode").get<double>(),
                                      j.at("concentration").get<double>());
  if (type == "point") return TauDistribution::point_mass(j.at("tau").get<double>());
  throw ConfigError("unknown tau_dist type '" + type + "'");
}

SimSpec parse_sim_spec(const json& j, std::uint64_t seed) {
  SimSpec spec;
  spec.family = sim_family_from_string(j.at("family").get<std::string>());
  spec.skew_a = j.value("a", 1.0);
  spec.skew_b = j.value("b", 1.0);
  spec.noise_scale = j.value("noise_scale", 1.0);
  spec.n = j.value("n", 100);
  spec.seed = seed;
  spec.validate();
  return spec;
}

DataSchema parse_schema(const json& j) {
  DataSchema schema;
  for (const auto& fj : j.at("features")) {
    ColumnSchema col;
    col.name = fj.at("name").get<std::string>();
    const std::string kind = fj.value("kind", "continuous");
    if (kind == "continuous") {
      col.kind = FeatureKind::Continuous;
    } else if (kind == "categorical") {
      col.kind = FeatureKind::Categorical;
      col.categories = fj.at("categories").get<std::vector<std::string>>();
      if (fj.contains("other_category"))
        col.other_category = fj.at("other_category").get<std::string>();
    } else {
      throw ConfigError("schema: unknown feature kind '" + kind + "'");
    }
    schema.features.push_back(std::move(col));
  }
  schema.label = j.value("label", std::string("y"));
  schema.subset_column = j.value("subset_column", std::string());
  return schema;
}

struct DataBundle {
  Dataset train, val, test;
  std::optional<SimSpec> sim;  // oracle handle (test part seed)
};

DataBundle load_or_generate(const json& data_cfg, std::uint64_t seed, Execution exec) {
  DataBundle bundle;
  const std::string source = data_cfg.value("source", "csv");
  if (source == "sim") {
    SimSpec base = parse_sim_spec(data_cfg.at("sim"), seed);
    SimSpec train_spec = base;
    train_spec.n = data_cfg.value("n_train", base.n);
    train_spec.seed = derive_seed(seed, 11);
    SimSpec val_spec = base;
    val_spec.n = data_cfg.value("n_val", train_spec.n);
    val_spec.seed = derive_seed(seed, 12);
    SimSpec test_spec = base;
    test_spec.n = data_cfg.value("n_test", train_spec.n);
    test_spec.seed = derive_seed(seed, 13);
    bundle.train = generate_sim(train_spec, exec);
    bundle.val = generate_sim(val_spec, exec);
    bundle.test = generate_sim(test_spec, exec);
    bundle.sim = test_spec;
    return bundle;
  }
  if (source != "csv") throw ConfigError("data.source must be 'sim' or 'csv'");
  const DataSchema schema = parse_schema(data_cfg.at("schema"));
  if (data_cfg.contains("path")) {
    const Dataset all = load_csv(data_cfg.at("path").get<std::string>(), schema);
    const auto& sj = data_cfg.at("split");
    const auto fr = sj.at("fractions").get<std::vector<double>>();
    if (fr.size() != 3) throw ConfigError("data.split.fractions must have 3 entries");
    const SplitMode mode =
        sj.value("mode", std::string("iid")) == "ordered" ? SplitMode::Ordered : SplitMode::IID;
    auto parts = split(all, mode, {fr[0], fr[1], fr[2]}, seed);
    bundle.train = std::move(parts[0]);
    bundle.val = std::move(parts[1]);
    bundle.test = std::move(parts[2]);
    return bundle;
  }
  bundle.train = load_csv(data_cfg.at("train").get<std::string>(), schema);
  bundle.val = load_csv(data_cfg.at("val").get<std::string>(), schema);
  bundle.test = load_csv(data_cfg.at("test").get<std::string>(), schema);
  return bundle;
}

FeatureSpec parse_feature_spec(const json& fj, int default_keypoints) {
  FeatureSpec f;
  f.name = fj.at("name").get<std::string>();
  const std::string kind = fj.value("kind", "continuous");
  if (kind == "continuous") {
    f.kind = FeatureKind::Continuous;
    f.lower = fj.at("lower").get<double>();
    f.upper = fj.at("upper").get<double>();
    f.monotone = fj.value("monotone", false);
    f.calibrator_keypoints = fj.value("calibrator_keypoints", default_keypoints);
  } else if (kind == "categorical") {
    f.kind = FeatureKind::Categorical;
    f.categories = fj.at("categories").get<std::vector<std::string>>();
    if (fj.contains("other_category"))
      f.other_category = fj.at("other_category").get<std::string>();
  } else {
    throw ConfigError("model: unknown feature kind '" + kind + "'");
  }
  return f;
}

// Bounds from the training data when the config does not declare features.
std::vector<FeatureSpec> derive_feature_specs(const json& model_cfg,
                                              const DataBundle& bundle,
                                              int default_keypoints) {
  if (bundle.sim) {
    auto specs = sim_feature_specs(*bundle.sim, default_keypoints);
    std::set<std::string> mono;
    for (const auto& name :
         model_cfg.value("monotone_features", std::vector<std::string>{}))
      mono.insert(name);
    for (auto& f : specs) f.monotone = mono.count(f.name) > 0;
    return specs;
  }
  const Dataset& train = bundle.train;
  std::vector<FeatureSpec> specs;
  std::set<std::string> mono;
  for (const auto& name : model_cfg.value("monotone_features", std::vector<std::string>{}))
    mono.insert(name);
  for (std::size_t j = 0; j < train.schema.features.size(); ++j) {
    const auto& col = train.schema.features[j];
    FeatureSpec f;
    f.name = col.name;
    f.kind = col.kind;
    if (col.kind == FeatureKind::Continuous) {
      double lo = train.features[j], hi = train.features[j];
      for (std::size_t i = 0; i < train.rows(); ++i) {
        lo = std::min(lo, train.row(i)[j]);
        hi = std::max(hi, train.row(i)[j]);
      }
      if (!(lo < hi)) hi = lo + 1.0;
      f.lower = lo;
      f.upper = hi;
      f.monotone = mono.count(f.name) > 0;
      f.calibrator_keypoints = default_keypoints;
    } else {
      f.categories = col.categories;
      f.other_category = col.other_category;
    }
    specs.push_back(std::move(f));
  }
  return specs;
}

ModelConfig parse_model_config(const json& model_cfg, const DataBundle& bundle) {
  ModelConfig mc;
  const int default_kp = model_cfg.value("calibrator_keypoints", 10);
  if (model_cfg.contains("features")) {
    for (const auto& fj : model_cfg.at("features"))
      mc.features.push_back(parse_feature_spec(fj, default_kp));
  } else {
    mc.features = derive_feature_specs(model_cfg, bundle, default_kp);
  }
  mc.tau_knots = model_cfg.value("tau_knots", 2);
  mc.tau_calibrator_keypoints = model_cfg.value("tau_calibrator_keypoints", 5);
  if (model_cfg.contains("ensemble")) {
    mc.ensemble = model_cfg.at("ensemble").get<std::vector<std::vector<std::string>>>();
  } else {
    std::vector<std::string> all;
    for (const auto& f : mc.features) all.push_back(f.name);
    mc.ensemble = {all};
  }
  if (model_cfg.contains("lattice_knots")) {
    const auto& lk = model_cfg.at("lattice_knots");
    if (lk.is_number())
      mc.lattice_knots = {lk.get<int>()};
    else
      mc.lattice_knots = lk.get<std::vector<int>>();
  }
  mc.non_crossing = model_cfg.value("non_crossing", true);
  mc.validate();
  return mc;
}

RateConstraintSpec parse_constraint(const json& cj) {
  RateConstraintSpec spec;
  spec.subset_column = cj.value("subset_column", std::string());
  spec.subset_value = cj.value("subset_value", std::string("all"));
  spec.tau_s = cj.at("tau").get<double>();
  spec.eps_minus = cj.value("eps_minus", 0.05);
  spec.eps_plus = cj.value("eps_plus", 0.05);
  spec.validate();
  return spec;
}

TrainConfig parse_train_config(const json& cfg, std::uint64_t seed) {
  TrainConfig tc;
  const json train_cfg = cfg.value("train", json::object());
  tc.epochs = train_cfg.value("epochs", 30);
  tc.batch_size = train_cfg.value("batch_size", 64);
  tc.learning_rate = train_cfg.value("learning_rate", 0.001);
  tc.seed = seed;
  tc.tau_dist = parse_tau_dist(train_cfg.value("tau_dist", json()));
  tc.projection_tol = train_cfg.value("projection_tol", 1e-9);
  if (train_cfg.contains("validation_taus"))
    tc.validation_taus = train_cfg.at("validation_taus").get<std::vector<double>>();
  tc.exec = train_cfg.value("exec", std::string("parallel")) == "serial"
                ? Execution::Serial
                : Execution::Parallel;
  tc.multiplier_lr = train_cfg.value("multiplier_lr", 0.01);
  tc.temperature_factor = train_cfg.value("temperature_factor", 0.05);
  if (train_cfg.contains("best_iterate_tolerance"))
    tc.best_iterate_tolerance = train_cfg.at("best_iterate_tolerance").get<double>();
  for (const auto& cj : cfg.value("constraints", json::array()))
    tc.constraints.push_back(parse_constraint(cj));
  tc.validate();
  return tc;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

void write_history_csv(const std::string& path, const std::vector<EpochStat>& history,
                       bool constrained, const std::string& hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open history file for writing: " + path);
  out << "# config_hash=" << hash << "\n";
  out << "epoch,train_loss,val_metric";
  if (constrained) out << ",max_violation";
  out << "\n";
  for (const auto& s : history) {
    out << s.epoch << ',' << format_double(s.train_loss) << ','
        << format_double(s.val_metric);
    if (constrained) out << ',' << format_double(s.max_violation);
    out << "\n";
  }
}

}  // namespace

// --- grid expansion ---------------------------------------------------------

std::vector<ExpandedRun> expand_grid(const json& config) {
  // (section, field) pairs that accept a list of scalars
  static const std::pair<const char*, const char*> kGridFields[] = {
      {"model", "tau_knots"},       {"model", "tau_calibrator_keypoints"},
      {"model", "calibrator_keypoints"}, {"train", "epochs"},
      {"train", "batch_size"},      {"train", "learning_rate"},
  };
  std::vector<ExpandedRun> runs{{config, ""}};
  auto expand_field = [&runs](const char* section, const char* field,
                              const std::vector<const char*>& path) {
    std::vector<ExpandedRun> next;
    for (const auto& run : runs) {
      const json* node = &run.config;
      if (!node->contains(section)) {
        next.push_back(run);
        continue;
      }
      node = &(*node)[section];
      for (const char* p : path) {
        if (!node->contains(p)) {
          node = nullptr;
          break;
        }
        node = &(*node)[p];
      }
      if (!node || !node->contains(field) || !(*node)[field].is_array()) {
        next.push_back(run);
        continue;
      }
      for (const auto& value : (*node)[field]) {
        ExpandedRun r = run;
        json* target = &r.config[section];
        for (const char* p : path) target = &(*target)[p];
        (*target)[field] = value;
        std::ostringstream label;
        if (!r.label.empty()) label << r.label << ",";
        label << field << "=" << value.dump();
        r.label = label.str();
        next.push_back(std::move(r));
      }
    }
    runs = std::move(next);
  };
  for (const auto& [section, field] : kGridFields) expand_field(section, field, {});
  expand_field("train", "concentration", {"tau_dist"});
  return runs;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const CommandIO& io) {
  const json cfg = load_config_file(io.config_path);
  const std::uint64_t seed = config_seed(cfg, io);
  const std::string hash = config_hash_hex(cfg);
  ensure_dir(io.out_dir);

  const json& data_cfg = cfg.at("data");
  if (data_cfg.value("source", "sim") != "sim")
    throw ConfigError("simulate requires data.source == \"sim\"");
  DataBundle bundle = load_or_generate(data_cfg, seed, Execution::Parallel);

  const fs::path out(io.out_dir);
  save_csv(bundle.train, (out / "train.csv").string(), hash);
  save_csv(bundle.val, (out / "val.csv").string(), hash);
  save_csv(bundle.test, (out / "test.csv").string(), hash);

  json sidecar;
  sidecar["config_hash"] = hash;
  sidecar["family"] = to_string(bundle.sim->family);
  sidecar["a"] = bundle.sim->skew_a;
  sidecar["b"] = bundle.sim->skew_b;
  sidecar["noise_scale"] = bundle.sim->noise_scale;
  sidecar["n"] = {{"train", bundle.train.rows()},
                  {"val", bundle.val.rows()},
                  {"test", bundle.test.rows()}};
  sidecar["seeds"] = {{"train", derive_seed(seed, 11)},
                      {"val", derive_seed(seed, 12)},
                      {"test", derive_seed(seed, 13)}};
  std::ofstream side((out / "sim_spec.json").string(), std::ios::binary);
  side << sidecar.dump(2) << '\n';
  return 0;
}

// --- train -------------------------------------------------------------------

int cmd_train(const CommandIO& io) {
  const json cfg = load_config_file(io.config_path);
  const std::uint64_t seed = config_seed(cfg, io);
  ensure_dir(io.out_dir);

  const std::vector<ExpandedRun> runs = expand_grid(cfg);
  const bool multi = runs.size() > 1;
  std::ofstream summary;
  if (multi) {
    summary.open((fs::path(io.out_dir) / "summary.csv").string(), std::ios::binary);
    summary << "# config_hash=" << config_hash_hex(cfg) << "\n";
    summary << "run,label,best_epoch,val_metric,max_violation,model_path\n";
  }

  bool any_aborted = false;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const json& run_cfg = runs[r].config;
    const std::string run_hash = config_hash_hex(run_cfg);
    fs::path run_dir(io.out_dir);
    if (multi) {
      char name[32];
      std::snprintf(name, sizeof(name), "run_%03zu", r);
      run_dir /= name;
      ensure_dir(run_dir.string());
    }

    DataBundle bundle =
        load_or_generate(run_cfg.at("data"), seed, Execution::Parallel);
    const ModelConfig mc = parse_model_config(run_cfg.value("model", json::object()), bundle);
    const TrainConfig tc = parse_train_config(run_cfg, seed);

    // rate constraints may target an auxiliary dataset instead of the
    // training set
    std::optional<Dataset> aux;
    const json& data_cfg = run_cfg.at("data");
    if (data_cfg.contains("constraint_data")) {
      aux = load_csv(data_cfg.at("constraint_data").get<std::string>(),
                     parse_schema(data_cfg.at("schema")));
    }

    QuantileModel model = init_model(mc, seed);
    FitResult result =
        fit(std::move(model), bundle.train, bundle.val, tc, aux ? &*aux : nullptr);
    any_aborted = any_aborted || result.aborted;

    const std::string model_path = (run_dir / "model.json").string();
    save_model(result.model, model_path, run_hash);
    write_history_csv((run_dir / "history.csv").string(), result.history,
                      !tc.constraints.empty(), run_hash);

    if (multi) {
      const auto& best = result.history[result.best_epoch];
      summary << r << ',' << runs[r].label << ',' << result.best_epoch << ','
              << format_double(best.val_metric) << ','
              << format_double(best.max_violation) << ',' << model_path << "\n";
    }
  }
  return any_aborted ? 3 : 0;
}

// --- eval --------------------------------------------------------------------

namespace {

std::vector<std::vector<double>> rows_as_points(const Dataset& data, std::size_t cap) {
  const std::size_t n = std::min(cap, data.rows());
  std::vector<std::vector<double>> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    xs[i].assign(row.begin(), row.end());
  }
  return xs;
}

}  // namespace

int cmd_eval(const CommandIO& io) {
  const json cfg = load_config_file(io.config_path);
  const std::uint64_t seed = config_seed(cfg, io);
  const std::string hash = config_hash_hex(cfg);
  ensure_dir(io.out_dir);

  const json eval_cfg = cfg.value("eval", json::object());
  if (!eval_cfg.contains("model"))
    throw ConfigError("eval requires eval.model (path to a model file)");
  const QuantileModel model = load_model(eval_cfg.at("model").get<std::string>());

  std::vector<double> taus = eval_cfg.contains("taus")
                                 ? eval_cfg.at("taus").get<std::vector<double>>()
                                 : default_tau_grid();
  std::sort(taus.begin(), taus.end());
  const std::size_t x_samples = eval_cfg.value("x_samples", std::size_t{1000});
  const int repeats = eval_cfg.value("repeats", 1);
  const auto subset_values =
      eval_cfg.value("subset_values", std::vector<std::string>{});
  const auto subset_taus = eval_cfg.value("subset_taus", std::vector<double>{});

  std::vector<double> rep_pinball, rep_crossing, rep_mse, rep_maxviol;
  std::vector<std::vector<double>> rep_per_tau;
  Dataset first_test;
  std::optional<SimSpec> first_sim;

  for (int rep = 0; rep < repeats; ++rep) {
    const json& data_cfg = cfg.at("data");
    DataBundle bundle;
    if (data_cfg.value("source", "csv") == "csv" && data_cfg.contains("test") &&
        !data_cfg.contains("train")) {
      // evaluation needs only the test part
      bundle.test = load_csv(data_cfg.at("test").get<std::string>(),
                             parse_schema(data_cfg.at("schema")));
    } else {
      bundle = load_or_generate(
          data_cfg, rep == 0 ? seed : derive_seed(seed, 9000 + rep), Execution::Parallel);
    }
    if (repeats > 1 && !bundle.sim)
      throw ConfigError("eval.repeats > 1 requires simulated data");
    const Dataset& test = bundle.test;
    if (model.config.features.size() != test.cols())
      throw ConfigError("eval: model and dataset disagree on the feature count");
    for (std::size_t j = 0; j < test.cols(); ++j) {
      if (model.config.features[j].name != test.schema.features[j].name)
        throw ConfigError("eval: model/schema mismatch at feature '" +
                          test.schema.features[j].name + "'");
    }
    if (rep == 0) {
      first_test = test;
      first_sim = bundle.sim;
    }

    const PinballEval pe = evaluate_pinball(model, test, taus, Execution::Parallel);
    rep_pinball.push_back(pe.overall);
    rep_per_tau.push_back(pe.per_tau);

    const auto xs = rows_as_points(test, x_samples);
    rep_crossing.push_back(crossing_rate(model, xs, taus, Execution::Parallel));

    if (bundle.sim) {
      const SimSpec spec = *bundle.sim;
      QuantileOracle oracle = [spec](std::span<const double> x, double tau) {
        return sim_true_quantile(spec, x, tau);
      };
      rep_mse.push_back(quantile_mse(model, oracle, xs, taus, Execution::Parallel));
    }

    if (!subset_values.empty() && !subset_taus.empty()) {
      std::vector<RateSubset> subsets;
      for (const auto& value : subset_values) {
        for (double t : subset_taus) {
          RateSubset s;
          s.name = value + "@" + format_short(t);
          s.rows = test.subset_rows(value);
          s.tau = t;
          subsets.push_back(std::move(s));
        }
      }
      rep_maxviol.push_back(
          max_quantile_violation(model, test, subsets, Execution::Parallel));
    }
  }

  MetricReport report;
  report.add_ci("pinball_mean", "", rep_pinball);
  report.add_ci("crossing_rate", "", rep_crossing);
  if (!rep_mse.empty()) report.add_ci("quantile_mse", "", rep_mse);
  if (!rep_maxviol.empty()) report.add_ci("max_quantile_violation", "", rep_maxviol);
  for (std::size_t t = 0; t < taus.size(); ++t) {
    std::vector<double> vals(rep_per_tau.size());
    for (std::size_t rep = 0; rep < rep_per_tau.size(); ++rep)
      vals[rep] = rep_per_tau[rep][t];
    report.add_ci("pinball", format_short(taus[t]), vals);
  }
  if (!subset_values.empty() && !subset_taus.empty()) {
    for (const auto& value : subset_values) {
      const auto rows = first_test.subset_rows(value);
      for (double t : subset_taus) {
        const double rate = empirical_rate(model, first_test, rows, t, Execution::Parallel);
        report.add("rate", value + "@" + format_short(t), rate);
      }
    }
  }

  const fs::path out(io.out_dir);
  write_report_csv(report, (out / "report.csv").string(), hash);
  write_report_text(report, (out / "report.txt").string(), hash);

  // plot-ready quantile curves for a sample of test points
  {
    const std::size_t curve_points = eval_cfg.value("curve_points", std::size_t{50});
    std::ofstream out_csv((out / "curves.csv").string(), std::ios::binary);
    out_csv << "# config_hash=" << hash << "\n";
    for (const auto& f : first_test.schema.features) out_csv << f.name << ',';
    out_csv << "tau,prediction";
    if (first_sim) out_csv << ",true_quantile";
    out_csv << "\n";
    const auto xs = rows_as_points(first_test, curve_points);
    for (const auto& x : xs) {
      const auto curve = predict_curve(model, x, taus);
      for (std::size_t t = 0; t < taus.size(); ++t) {
        for (double v : x) out_csv << format_double(v) << ',';
        out_csv << format_double(taus[t]) << ',' << format_double(curve[t]);
        if (first_sim)
          out_csv << ',' << format_double(sim_true_quantile(*first_sim, x, taus[t]));
        out_csv << "\n";
      }
    }
  }
  return 0;
}

// --- uqe ----------------------------------------------------------------------

namespace {

// Linear-in-tau model (no features, two tau knots) trained by projected
// Adam on the expected pinball loss.
QuantileModel train_linear_tau(std::span<const double> samples,
                               const TauDistribution& dist, int epochs, int batch_size,
                               double lr, std::uint64_t seed) {
  ModelConfig mc;
  mc.tau_knots = 2;
  mc.tau_calibrator_keypoints = 2;
  mc.ensemble = {{}};
  mc.non_crossing = true;
  QuantileModel model = init_model(mc, seed);

  Dataset data;
  data.schema.label = "y";
  data.labels.assign(samples.begin(), samples.end());

  Rng rng(seed);
  AdamState adam(model.params.size(), lr);
  const std::size_t n = data.rows();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto perm = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t len = std::min<std::size_t>(batch_size, n - start);
      const BatchObjective obj = expected_pinball_batch(
          model, data, {perm.data() + start, len}, dist, rng, Execution::Serial);
      adam_step(model.params, obj.grad, adam);
      project_model(model, 1e-9);
    }
  }
  return model;
}

}  // namespace

int cmd_uqe(const CommandIO& io) {
  const json cfg = load_config_file(io.config_path);
  const std::uint64_t seed = config_seed(cfg, io);
  const std::string hash = config_hash_hex(cfg);
  ensure_dir(io.out_dir);

  const json uqe = cfg.value("uqe", json::object());
  // source distribution: exponential(lambda) or a degenerate constant
  std::string dist_type = "exponential";
  double lambda = uqe.value("lambda", 1.0);
  double const_value = 0.0;
  if (uqe.contains("distribution")) {
    const json& dj = uqe.at("distribution");
    dist_type = dj.value("type", "exponential");
    if (dist_type == "exponential") {
      lambda = dj.value("lambda", lambda);
    } else if (dist_type == "constant") {
      const_value = dj.at("value").get<double>();
    } else {
      throw ConfigError("uqe: unknown distribution type '" + dist_type + "'");
    }
  }
  auto draw_samples = [&](int count, std::uint64_t s) {
    if (dist_type == "constant") return std::vector<double>(count, const_value);
    return sample_exponential(lambda, count, s);
  };
  auto true_quantile = [&](double tau) {
    return dist_type == "constant" ? const_value : exponential_quantile(lambda, tau);
  };
  const int n = uqe.value("n", 51);
  const int repeats = uqe.value("repeats", 1000);
  const auto taus = uqe.value("taus", std::vector<double>{0.5});
  const auto concentrations =
      uqe.value("concentrations", std::vector<double>{10, 100, 1000, 10000});
  const auto estimators =
      uqe.value("estimators", std::vector<std::string>{"sample", "hd", "linear"});
  const int epochs = uqe.value("epochs", 60);
  const int batch_size = uqe.value("batch_size", 10);
  const double lr = uqe.value("learning_rate", 0.01);
  if (repeats < 2) throw ConfigError("uqe: repeats must be >= 2");

  const bool want_sample =
      std::find(estimators.begin(), estimators.end(), "sample") != estimators.end();
  const bool want_hd =
      std::find(estimators.begin(), estimators.end(), "hd") != estimators.end();
  const bool want_linear =
      std::find(estimators.begin(), estimators.end(), "linear") != estimators.end();

  const std::size_t T = taus.size();
  const std::size_t C = concentrations.size();
  std::vector<double> err_sample(repeats * T, 0.0);
  std::vector<double> err_hd(repeats * T, 0.0);
  std::vector<double> err_linear(repeats * T * C, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int rep = 0; rep < repeats; ++rep) {
    const auto samples = draw_samples(n, derive_seed(seed, 100 + rep));
    for (std::size_t t = 0; t < T; ++t) {
      const double truth = true_quantile(taus[t]);
      if (want_sample) {
        const double e = sample_quantile(samples, taus[t]) - truth;
        err_sample[rep * T + t] = e * e;
      }
      if (want_hd) {
        const double e = harrell_davis(samples, taus[t]) - truth;
        err_hd[rep * T + t] = e * e;
      }
      if (want_linear) {
        for (std::size_t c = 0; c < C; ++c) {
          const auto dist = TauDistribution::beta_mode(taus[t], concentrations[c]);
          const QuantileModel m =
              train_linear_tau(samples, dist, epochs, batch_size, lr,
                               derive_seed(seed, 777 + rep));
          const double e = predict(m, {}, taus[t]) - truth;
          err_linear[(rep * T + t) * C + c] = e * e;
        }
      }
    }
  }

  const fs::path out(io.out_dir);
  std::ofstream out_csv((out / "uqe.csv").string(), std::ios::binary);
  out_csv << "# config_hash=" << hash << "\n";
  out_csv << "estimator,tau,concentration,mse,ci95_half\n";
  auto emit = [&](const std::string& name, double tau, const std::string& conc,
                  std::span<const double> errs) {
    const auto [mean, half] = mean_ci(errs);
    out_csv << name << ',' << format_short(tau) << ',' << conc << ','
            << format_double(mean) << ',' << format_double(half) << "\n";
  };
  std::vector<double> col(repeats);
  for (std::size_t t = 0; t < T; ++t) {
    if (want_sample) {
      for (int rep = 0; rep < repeats; ++rep) col[rep] = err_sample[rep * T + t];
      emit("sample", taus[t], "", col);
    }
    if (want_hd) {
      for (int rep = 0; rep < repeats; ++rep) col[rep] = err_hd[rep * T + t];
      emit("hd", taus[t], "", col);
    }
    if (want_linear) {
      for (std::size_t c = 0; c < C; ++c) {
        for (int rep = 0; rep < repeats; ++rep)
          col[rep] = err_linear[(rep * T + t) * C + c];
        emit("linear", taus[t], format_short(concentrations[c]), col);
      }
    }
  }
  return 0;
}

}  // namespace qlat
