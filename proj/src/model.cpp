#include "qlat/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qlat/common.hpp"
#include "qlat/rng.hpp"

namespace qlat {

using nlohmann::json;

void ModelConfig::validate() const {
  if (tau_knots < 2) throw ConfigError("model: tau_knots must be >= 2");
  if (tau_calibrator_keypoints < 2)
    throw ConfigError("model: tau_calibrator_keypoints must be >= 2");
  if (ensemble.empty()) throw ConfigError("model: ensemble must have at least one lattice");
  if (lattice_knots.empty() ||
      (lattice_knots.size() != 1 && lattice_knots.size() != ensemble.size()))
    throw ConfigError("model: lattice_knots must have one entry or one per lattice");
  for (int k : lattice_knots)
    if (k < 2) throw ConfigError("model: lattice knot counts must be >= 2");

  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw ConfigError("model: feature with empty name");
    if (!names.insert(f.name).second)
      throw ConfigError("model: duplicate feature name '" + f.name + "'");
    if (f.kind == FeatureKind::Continuous) {
      if (!std::isfinite(f.lower) || !std::isfinite(f.upper) || !(f.lower < f.upper))
        throw ConfigError("model: feature '" + f.name + "' needs finite bounds lower < upper");
      if (f.calibrator_keypoints < 2)
        throw ConfigError("model: feature '" + f.name + "' needs >= 2 calibrator keypoints");
    } else {
      if (f.categories.empty())
        throw ConfigError("model: categorical feature '" + f.name + "' has no categories");
      std::set<std::string> cats(f.categories.begin(), f.categories.end());
      if (cats.size() != f.categories.size())
        throw ConfigError("model: duplicate category in feature '" + f.name + "'");
      if (f.monotone)
        throw ConfigError("model: monotonicity is not supported on categorical feature '" +
                          f.name + "'");
      if (f.other_category &&
          std::find(f.categories.begin(), f.categories.end(), *f.other_category) ==
              f.categories.end())
        throw ConfigError("model: other_category of '" + f.name +
                          "' must be one of its categories");
    }
  }
  std::set<std::string> used;
  for (const auto& subset : ensemble) {
    std::set<std::string> seen;
    for (const auto& name : subset) {
      if (feature_index(name) < 0)
        throw ConfigError("model: ensemble references unknown feature '" + name + "'");
      if (!seen.insert(name).second)
        throw ConfigError("model: feature '" + name + "' repeated within one lattice");
      used.insert(name);
    }
  }
  for (const auto& f : features) {
    if (f.monotone && !used.count(f.name))
      throw ConfigError("model: monotone feature '" + f.name + "' is in no lattice");
  }
}

int ModelConfig::feature_index(const std::string& name) const {
  for (std::size_t j = 0; j < features.size(); ++j)
    if (features[j].name == name) return static_cast<int>(j);
  return -1;
}

namespace {

std::vector<double> uniform_keypoints(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

ParamLayout build_layout(const ModelConfig& config,
                         const std::vector<LatticeMember>& lattices) {
  ParamLayout layout;
  layout.bias = 0;
  layout.weights = 1;
  std::size_t next = 1 + lattices.size();
  layout.tau_calib = next;
  layout.tau_calib_size = static_cast<std::size_t>(config.tau_calibrator_keypoints);
  next += layout.tau_calib_size;
  layout.feature_calib.resize(config.features.size());
  layout.feature_calib_size.resize(config.features.size());
  for (std::size_t j = 0; j < config.features.size(); ++j) {
    const auto& f = config.features[j];
    layout.feature_calib[j] = next;
    layout.feature_calib_size[j] = f.kind == FeatureKind::Continuous
                                       ? static_cast<std::size_t>(f.calibrator_keypoints)
                                       : f.categories.size();
    next += layout.feature_calib_size[j];
  }
  layout.lattice.resize(lattices.size());
  for (std::size_t k = 0; k < lattices.size(); ++k) {
    layout.lattice[k] = next;
    next += lattices[k].grid.size();
  }
  layout.total = next;
  return layout;
}

}  // namespace

QuantileModel build_model_structure(const ModelConfig& config) {
  config.validate();
  QuantileModel m;
  m.config = config;
  m.calib_inputs.resize(config.features.size());
  for (std::size_t j = 0; j < config.features.size(); ++j) {
    const auto& f = config.features[j];
    if (f.kind == FeatureKind::Continuous)
      m.calib_inputs[j] = uniform_keypoints(f.lower, f.upper, f.calibrator_keypoints);
  }
  m.tau_calib_inputs = uniform_keypoints(0.0, 1.0, config.tau_calibrator_keypoints);

  for (std::size_t k = 0; k < config.ensemble.size(); ++k) {
    LatticeMember member;
    const int knots =
        config.lattice_knots.size() == 1 ? config.lattice_knots[0] : config.lattice_knots[k];
    std::vector<std::vector<double>> grid_knots;
    for (const auto& name : config.ensemble[k]) {
      const int j = config.feature_index(name);
      member.feature_index.push_back(j);
      grid_knots.push_back(uniform_keypoints(0.0, 1.0, knots));
      if (config.features[j].monotone) member.monotone.dims.push_back(grid_knots.size() - 1);
    }
    grid_knots.push_back(uniform_keypoints(0.0, 1.0, config.tau_knots));  // tau last
    if (config.non_crossing) member.monotone.dims.push_back(grid_knots.size() - 1);
    member.grid = Grid(std::move(grid_knots));
    m.lattices.push_back(std::move(member));
  }
  m.layout = build_layout(config, m.lattices);
  for (std::size_t k = 0; k < m.lattices.size(); ++k)
    m.lattices[k].theta_offset = m.layout.lattice[k];
  m.params.assign(m.layout.total, 0.0);
  return m;
}

QuantileModel init_model(const ModelConfig& config, std::uint64_t seed) {
  QuantileModel m = build_model_structure(config);
  Rng rng(seed);
  const std::size_t K = m.lattices.size();
  m.params[m.layout.bias] = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    m.params[m.layout.weights + k] = 1.0 / static_cast<double>(K);
  // tau calibrator: identity
  for (std::size_t i = 0; i < m.layout.tau_calib_size; ++i)
    m.params[m.layout.tau_calib + i] = m.tau_calib_inputs[i];
  // feature calibrators: ramps onto [0, 1]
  for (std::size_t j = 0; j < config.features.size(); ++j) {
    const std::size_t n = m.layout.feature_calib_size[j];
    double* out = m.params.data() + m.layout.feature_calib[j];
    if (n == 1) {
      out[0] = 0.5;
    } else {
      for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    }
  }
  // lattices: ramp in the tau knot position, noise only along
  // non-monotone dimensions so every constraint holds at initialization
  for (std::size_t k = 0; k < K; ++k) {
    const LatticeMember& member = m.lattices[k];
    const Grid& g = member.grid;
    const std::size_t D = g.dims();
    const std::size_t tau_dim = D - 1;
    std::vector<bool> is_mono(D, false);
    for (std::size_t d : member.monotone.dims) is_mono[d] = true;

    std::vector<std::size_t> key_stride(D, 0);
    std::size_t n_keys = 1;
    bool any_free = false;
    for (std::size_t d = 0; d < D; ++d) {
      if (is_mono[d]) continue;
      any_free = true;
      key_stride[d] = n_keys;
      n_keys *= g.knot_count(d);
    }
    std::vector<double> noise(any_free ? n_keys : 0);
    for (double& v : noise) v = rng.uniform(-0.01, 0.01);

    double* theta = m.params.data() + member.theta_offset;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const std::size_t i_tau = (idx / g.stride(tau_dim)) % g.knot_count(tau_dim);
      double v = g.knots(tau_dim)[i_tau];
      if (!noise.empty()) {
        std::size_t key = 0;
        for (std::size_t d = 0; d < D; ++d) {
          if (is_mono[d]) continue;
          key += ((idx / g.stride(d)) % g.knot_count(d)) * key_stride[d];
        }
        v += noise[key];
      }
      theta[idx] = v;
    }
  }
  return m;
}

namespace {

double calibrated_value(const QuantileModel& m, std::size_t j, double xj) {
  const auto& f = m.config.features[j];
  if (f.kind == FeatureKind::Continuous) {
    return plf_evaluate(m.calib_inputs[j], m.feature_calib_outputs(j), xj);
  }
  const auto cat = static_cast<long long>(xj);
  if (cat < 0 || static_cast<std::size_t>(cat) >= f.categories.size() ||
      static_cast<double>(cat) != xj)
    throw InputError("predict: invalid category index for feature '" + f.name + "'");
  return m.feature_calib_outputs(j)[static_cast<std::size_t>(cat)];
}

void calibrate_all(const QuantileModel& m, std::span<const double> x, PredictWork& ws) {
  if (x.size() != m.config.features.size())
    throw InputError("predict: feature vector length mismatch");
  ws.calibrated.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) ws.calibrated[j] = calibrated_value(m, j, x[j]);
}

double combine_at_c(const QuantileModel& m, PredictWork& ws, double c) {
  double acc = m.bias();
  const auto w = m.weights();
  for (std::size_t k = 0; k < m.lattices.size(); ++k) {
    const LatticeMember& member = m.lattices[k];
    const std::size_t F = member.grid.dims() - 1;
    ws.input.resize(F);
    for (std::size_t p = 0; p < F; ++p)
      ws.input[p] = ws.calibrated[member.feature_index[p]];
    const double* theta = m.params.data() + member.theta_offset;
    const double val = lattice_eval_last_dim_safe(
        member.grid, {theta, member.grid.size()}, ws.input, c, ws.lattice);
    acc += w[k] * val;
  }
  return acc;
}

}  // namespace

double predict(const QuantileModel& m, std::span<const double> x, double tau,
               PredictWork& ws) {
  calibrate_all(m, x, ws);
  const double c = plf_evaluate(m.tau_calib_inputs, m.tau_calib_outputs(),
                                std::clamp(tau, 0.0, 1.0));
  return combine_at_c(m, ws, c);
}

double predict(const QuantileModel& m, std::span<const double> x, double tau) {
  PredictWork ws;
  return predict(m, x, tau, ws);
}

double predict_at_c(const QuantileModel& m, std::span<const double> x, double c) {
  PredictWork ws;
  calibrate_all(m, x, ws);
  return combine_at_c(m, ws, std::clamp(c, 0.0, 1.0));
}

std::vector<double> predict_curve(const QuantileModel& m, std::span<const double> x,
                                  std::span<const double> taus) {
  PredictWork ws;
  calibrate_all(m, x, ws);
  std::vector<double> out(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double c = plf_evaluate(m.tau_calib_inputs, m.tau_calib_outputs(),
                                  std::clamp(taus[i], 0.0, 1.0));
    out[i] = combine_at_c(m, ws, c);
  }
  return out;
}

double forward_sparse_grad(const QuantileModel& m, std::span<const double> x, double tau,
                           PredictWork& ws) {
  calibrate_all(m, x, ws);
  const auto& L = m.layout;
  ws.grad_index.clear();
  ws.grad_value.clear();
  auto push = [&ws](std::size_t i, double v) {
    ws.grad_index.push_back(i);
    ws.grad_value.push_back(v);
  };

  const double tau_c = std::clamp(tau, 0.0, 1.0);
  const PlfSegment tau_seg = plf_locate(m.tau_calib_inputs, tau_c);
  const auto tau_out = m.tau_calib_outputs();
  const double c = (1.0 - tau_seg.t) * tau_out[tau_seg.left] +
                   tau_seg.t * tau_out[tau_seg.left + 1];

  double value = m.bias();
  push(L.bias, 1.0);
  const auto w = m.weights();
  for (std::size_t k = 0; k < m.lattices.size(); ++k) {
    const LatticeMember& member = m.lattices[k];
    const std::size_t D = member.grid.dims();
    ws.input.resize(D);
    ws.dinput.resize(D);
    for (std::size_t p = 0; p + 1 < D; ++p)
      ws.input[p] = ws.calibrated[member.feature_index[p]];
    ws.input[D - 1] = c;
    const double* theta = m.params.data() + member.theta_offset;
    const double val = lattice_eval_with_input_grad(
        member.grid, {theta, member.grid.size()}, ws.input, ws.lattice,
        std::span<double>(ws.dinput.data(), D));
    value += w[k] * val;
    push(L.weights + k, val);
    for (std::size_t i = 0; i < ws.lattice.index.size(); ++i)
      push(member.theta_offset + ws.lattice.index[i], w[k] * ws.lattice.weight[i]);
    for (std::size_t p = 0; p + 1 < D; ++p) {
      const int j = member.feature_index[p];
      const double coeff = w[k] * ws.dinput[p];
      if (coeff == 0.0) continue;
      const auto& f = m.config.features[j];
      if (f.kind == FeatureKind::Continuous) {
        const PlfSegment seg = plf_locate(m.calib_inputs[j], x[j]);
        push(L.feature_calib[j] + seg.left, coeff * (1.0 - seg.t));
        push(L.feature_calib[j] + seg.left + 1, coeff * seg.t);
      } else {
        push(L.feature_calib[j] + static_cast<std::size_t>(x[j]), coeff);
      }
    }
    const double ccoeff = w[k] * ws.dinput[D - 1];
    if (ccoeff != 0.0) {
      push(L.tau_calib + tau_seg.left, ccoeff * (1.0 - tau_seg.t));
      push(L.tau_calib + tau_seg.left + 1, ccoeff * tau_seg.t);
    }
  }
  return value;
}

ForwardResult forward_with_grad(const QuantileModel& m, std::span<const double> x,
                                double tau) {
  PredictWork ws;
  ForwardResult r;
  r.value = forward_sparse_grad(m, x, tau, ws);
  r.grad.assign(m.layout.total, 0.0);
  for (std::size_t i = 0; i < ws.grad_index.size(); ++i)
    r.grad[ws.grad_index[i]] += ws.grad_value[i];
  return r;
}

namespace {

void clamp_unit(std::span<double> v) {
  for (double& e : v) e = std::clamp(e, 0.0, 1.0);
}

}  // namespace

void project_model(QuantileModel& m, double tol) {
  if (!(tol > 0.0)) throw InputError("project_model: tol must be positive");
  for (std::size_t k = 0; k < m.lattices.size(); ++k) {
    double& wk = m.params[m.layout.weights + k];
    if (wk < 0.0) wk = 0.0;
  }
  {
    std::span<double> v(m.params.data() + m.layout.tau_calib, m.layout.tau_calib_size);
    if (m.config.non_crossing) {
      v.front() = 0.0;
      v.back() = 1.0;
      if (v.size() > 2) {
        std::span<double> interior = v.subspan(1, v.size() - 2);
        isotonic_fit(interior);
        clamp_unit(interior);
      }
    } else {
      clamp_unit(v);
    }
  }
  for (std::size_t j = 0; j < m.config.features.size(); ++j) {
    std::span<double> v(m.params.data() + m.layout.feature_calib[j],
                        m.layout.feature_calib_size[j]);
    if (m.config.features[j].monotone) isotonic_fit(v);
    clamp_unit(v);
  }
  for (std::size_t k = 0; k < m.lattices.size(); ++k) {
    const LatticeMember& member = m.lattices[k];
    if (member.monotone.dims.empty()) continue;
    std::span<const double> theta(m.params.data() + member.theta_offset,
                                  member.grid.size());
    std::vector<double> projected =
        project_monotone(member.grid, theta, member.monotone, ProjectOptions{tol, 1000});
    std::copy(projected.begin(), projected.end(), m.params.begin() + member.theta_offset);
  }
}

LocationScaleResidual location_scale_residual(const QuantileModel& m,
                                              std::span<const std::vector<double>> xs,
                                              std::span<const double> taus) {
  if (m.config.tau_knots != 2)
    throw ConfigError("location_scale_residual requires tau_knots == 2");
  LocationScaleResidual r;
  PredictWork ws;
  for (const auto& x : xs) {
    calibrate_all(m, x, ws);
    const double lo = combine_at_c(m, ws, 0.0);
    const double hi = combine_at_c(m, ws, 1.0);
    const double scale = hi - lo;
    if (std::fabs(scale) <= 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)})) {
      ++r.skipped;
      continue;
    }
    for (double tau : taus) {
      const double c = plf_evaluate(m.tau_calib_inputs, m.tau_calib_outputs(),
                                    std::clamp(tau, 0.0, 1.0));
      const double f = combine_at_c(m, ws, c);
      r.max_residual = std::max(r.max_residual, std::fabs((f - lo) / scale - c));
    }
  }
  return r;
}

// --- serialization ---------------------------------------------------------

namespace {

json feature_to_json(const FeatureSpec& f) {
  json j;
  j["name"] = f.name;
  j["kind"] = f.kind == FeatureKind::Continuous ? "continuous" : "categorical";
  if (f.kind == FeatureKind::Continuous) {
    j["lower"] = f.lower;
    j["upper"] = f.upper;
    j["monotone"] = f.monotone;
    j["calibrator_keypoints"] = f.calibrator_keypoints;
  } else {
    j["categories"] = f.categories;
    if (f.other_category) j["other_category"] = *f.other_category;
  }
  return j;
}

FeatureSpec feature_from_json(const json& j) {
  FeatureSpec f;
  f.name = j.at("name").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "continuous") {
    f.kind = FeatureKind::Continuous;
    f.lower = j.at("lower").get<double>();
    f.upper = j.at("upper").get<double>();
    f.monotone = j.value("monotone", false);
    f.calibrator_keypoints = j.value("calibrator_keypoints", 10);
  } else if (kind == "categorical") {
    f.kind = FeatureKind::Categorical;
    f.categories = j.at("categories").get<std::vector<std::string>>();
    if (j.contains("other_category"))
      f.other_category = j.at("other_category").get<std::string>();
  } else {
    throw ConfigError("model file: unknown feature kind '" + kind + "'");
  }
  return f;
}

json config_to_json(const ModelConfig& c) {
  json j;
  j["features"] = json::array();
  for (const auto& f : c.features) j["features"].push_back(feature_to_json(f));
  j["tau_knots"] = c.tau_knots;
  j["tau_calibrator_keypoints"] = c.tau_calibrator_keypoints;
  j["ensemble"] = c.ensemble;
  j["lattice_knots"] = c.lattice_knots;
  j["non_crossing"] = c.non_crossing;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  for (const auto& fj : j.at("features")) c.features.push_back(feature_from_json(fj));
  c.tau_knots = j.at("tau_knots").get<int>();
  c.tau_calibrator_keypoints = j.at("tau_calibrator_keypoints").get<int>();
  c.ensemble = j.at("ensemble").get<std::vector<std::vector<std::string>>>();
  c.lattice_knots = j.at("lattice_knots").get<std::vector<int>>();
  c.non_crossing = j.at("non_crossing").get<bool>();
  return c;
}

}  // namespace

std::string model_to_json(const QuantileModel& m, const std::string& config_hash) {
  json j;
  j["format_version"] = 1;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["config"] = config_to_json(m.config);
  j["bias"] = m.bias();
  j["weights"] = std::vector<double>(m.weights().begin(), m.weights().end());
  j["tau_calibrator"] = {
      {"inputs", m.tau_calib_inputs},
      {"outputs",
       std::vector<double>(m.tau_calib_outputs().begin(), m.tau_calib_outputs().end())}};
  json calibs = json::array();
  for (std::size_t jf = 0; jf < m.config.features.size(); ++jf) {
    json cj;
    cj["name"] = m.config.features[jf].name;
    if (m.config.features[jf].kind == FeatureKind::Continuous)
      cj["inputs"] = m.calib_inputs[jf];
    cj["outputs"] = std::vector<double>(m.feature_calib_outputs(jf).begin(),
                                        m.feature_calib_outputs(jf).end());
    calibs.push_back(std::move(cj));
  }
  j["feature_calibrators"] = std::move(calibs);
  json lattices = json::array();
  for (std::size_t k = 0; k < m.lattices.size(); ++k) {
    json lj;
    std::vector<std::vector<double>> kn;
    for (std::size_t d = 0; d < m.lattices[k].grid.dims(); ++d)
      kn.push_back(m.lattices[k].grid.knots(d));
    lj["knots"] = std::move(kn);
    lj["theta"] =
        std::vector<double>(m.lattice_theta(k).begin(), m.lattice_theta(k).end());
    lattices.push_back(std::move(lj));
  }
  j["lattices"] = std::move(lattices);
  return j.dump(2);
}

QuantileModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      throw ConfigError("model file: unsupported format_version");
    QuantileModel m = build_model_structure(config_from_json(j.at("config")));
    m.params[m.layout.bias] = j.at("bias").get<double>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != m.lattices.size())
      throw ConfigError("model file: weight count mismatch");
    std::copy(weights.begin(), weights.end(), m.params.begin() + m.layout.weights);

    const auto& tc = j.at("tau_calibrator");
    const auto t_in = tc.at("inputs").get<std::vector<double>>();
    const auto t_out = tc.at("outputs").get<std::vector<double>>();
    if (t_in.size() != m.layout.tau_calib_size || t_out.size() != m.layout.tau_calib_size)
      throw ConfigError("model file: tau calibrator size mismatch");
    m.tau_calib_inputs = t_in;
    std::copy(t_out.begin(), t_out.end(), m.params.begin() + m.layout.tau_calib);

    const auto& calibs = j.at("feature_calibrators");
    if (calibs.size() != m.config.features.size())
      throw ConfigError("model file: calibrator count mismatch");
    for (std::size_t jf = 0; jf < m.config.features.size(); ++jf) {
      const auto out = calibs[jf].at("outputs").get<std::vector<double>>();
      if (out.size() != m.layout.feature_calib_size[jf])
        throw ConfigError("model file: calibrator size mismatch for feature " +
                          m.config.features[jf].name);
      if (m.config.features[jf].kind == FeatureKind::Continuous) {
        const auto in = calibs[jf].at("inputs").get<std::vector<double>>();
        if (in.size() != out.size())
          throw ConfigError("model file: calibrator keypoint mismatch");
        m.calib_inputs[jf] = in;
      }
      std::copy(out.begin(), out.end(), m.params.begin() + m.layout.feature_calib[jf]);
    }

    const auto& lats = j.at("lattices");
    if (lats.size() != m.lattices.size())
      throw ConfigError("model file: lattice count mismatch");
    for (std::size_t k = 0; k < m.lattices.size(); ++k) {
      const auto knots = lats[k].at("knots").get<std::vector<std::vector<double>>>();
      Grid grid(knots);
      if (grid.dims() != m.lattices[k].grid.dims() ||
          grid.size() != m.lattices[k].grid.size())
        throw ConfigError("model file: lattice shape mismatch");
      m.lattices[k].grid = std::move(grid);
      const auto theta = lats[k].at("theta").get<std::vector<double>>();
      if (theta.size() != m.lattices[k].grid.size())
        throw ConfigError("model file: theta size mismatch");
      std::copy(theta.begin(), theta.end(), m.params.begin() + m.lattices[k].theta_offset);
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: missing or mistyped field: ") + e.what());
  }
}

void save_model(const QuantileModel& m, const std::string& path,
                const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open model file for writing: " + path);
  out << model_to_json(m, config_hash) << '\n';
  if (!out) throw ConfigError("failed writing model file: " + path);
}

QuantileModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace qlat
