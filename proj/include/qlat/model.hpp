#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlat/isotonic.hpp"
#include "qlat/lattice.hpp"

namespace qlat {

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  double lower = 0.0;  // continuous bounds
  double upper = 1.0;
  std::vector<std::string> categories;        // categorical only
  std::optional<std::string> other_category;  // unknown values map here if set
  bool monotone = false;                      // continuous only
  int calibrator_keypoints = 10;              // continuous only
};

struct ModelConfig {
  std::vector<FeatureSpec> features;
  int tau_knots = 2;  // 2 selects the location-scale regime
  int tau_calibrator_keypoints = 5;
  // Feature-name subsets, one lattice each; tau is implicitly the last
  // dimension of every lattice. An empty subset gives a lattice on tau alone.
  std::vector<std::vector<std::string>> ensemble;
  // Knots per feature dimension, one entry per ensemble member (a single
  // entry is broadcast).
  std::vector<int> lattice_knots = {2};
  bool non_crossing = true;

  void validate() const;
  int feature_index(const std::string& name) const;  // -1 if absent
};

struct LatticeMember {
  std::vector<int> feature_index;        // config feature indices; tau is last dim
  Grid grid;                             // dims = features + tau
  MonotoneSpec monotone;                 // cached monotone dims
  std::size_t theta_offset = 0;          // into QuantileModel::params
};

// Offsets into the flat trainable vector. Order: bias, combination weights,
// tau calibrator outputs, per-feature calibrator outputs (config order),
// lattice parameter blocks (ensemble order).
struct ParamLayout {
  std::size_t bias = 0;
  std::size_t weights = 0;
  std::size_t tau_calib = 0;
  std::size_t tau_calib_size = 0;
  std::vector<std::size_t> feature_calib;
  std::vector<std::size_t> feature_calib_size;
  std::vector<std::size_t> lattice;
  std::size_t total = 0;
};

// Calibrators + lattice ensemble + nonnegative combination. When
// non_crossing is set, the tau calibrator is pinned to c(0)=0, c(1)=1 and
// every lattice is monotone in its tau dimension, so quantile curves cannot
// cross by construction.
struct QuantileModel {
  ModelConfig config;
  std::vector<std::vector<double>> calib_inputs;  // continuous: input keypoints
  std::vector<double> tau_calib_inputs;
  std::vector<LatticeMember> lattices;
  ParamLayout layout;
  std::vector<double> params;

  std::span<const double> weights() const {
    return {params.data() + layout.weights, lattices.size()};
  }
  double bias() const { return params[layout.bias]; }
  std::span<const double> tau_calib_outputs() const {
    return {params.data() + layout.tau_calib, layout.tau_calib_size};
  }
  std::span<const double> feature_calib_outputs(std::size_t j) const {
    return {params.data() + layout.feature_calib[j], layout.feature_calib_size[j]};
  }
  std::span<const double> lattice_theta(std::size_t k) const {
    return {params.data() + layout.lattice[k], lattices[k].grid.size()};
  }
};

// Builds the model structure and initializes parameters: identity-like
// calibrator ramps, lattice values set to a linear ramp in the tau knot
// position plus uniform noise of scale 0.01 varying only along
// non-monotone dimensions. The result satisfies every monotonicity
// invariant and is bit-reproducible for a fixed seed.
QuantileModel init_model(const ModelConfig& config, std::uint64_t seed);

// Structure without parameter initialization (used by deserialization).
QuantileModel build_model_structure(const ModelConfig& config);

// Per-call scratch for prediction and gradients.
struct PredictWork {
  std::vector<double> calibrated;  // per feature
  std::vector<double> input;       // lattice input buffer
  std::vector<double> dinput;      // lattice input derivative buffer
  LatticeWork lattice;
  std::vector<std::size_t> grad_index;  // sparse gradient entries
  std::vector<double> grad_value;
};

// x holds one value per config feature; categorical entries carry the
// category index. tau is clamped to [0, 1].
double predict(const QuantileModel& model, std::span<const double> x, double tau);
double predict(const QuantileModel& model, std::span<const double> x, double tau,
               PredictWork& work);

// Vectorized predict over a sorted tau grid.
std::vector<double> predict_curve(const QuantileModel& model, std::span<const double> x,
                                  std::span<const double> taus);

// Forward pass collecting the sparse gradient of the prediction w.r.t. the
// trainable vector into work.grad_index / work.grad_value. Entries may
// repeat; they add up.
double forward_sparse_grad(const QuantileModel& model, std::span<const double> x,
                           double tau, PredictWork& work);

struct ForwardResult {
  double value = 0.0;
  std::vector<double> grad;  // dense, layout.total
};
ForwardResult forward_with_grad(const QuantileModel& model, std::span<const double> x,
                                double tau);

// Projects all constrained parameter blocks: weight nonnegativity,
// calibrator output range [0, 1], tau calibrator endpoints 0 and 1,
// calibrator monotonicity, and lattice monotonicity.
void project_model(QuantileModel& model, double tol);

struct LocationScaleResidual {
  double max_residual = 0.0;
  std::size_t skipped = 0;  // x probes with degenerate scale
};

// Max over (x, tau) of |(f(x,tau) - f(x,0)) / (f(x,1) - f(x,0)) - c(tau)|.
// Requires tau_knots == 2.
LocationScaleResidual location_scale_residual(const QuantileModel& model,
                                              std::span<const std::vector<double>> xs,
                                              std::span<const double> taus);

// Evaluation at a fixed tau-calibrator output value (bypasses c).
double predict_at_c(const QuantileModel& model, std::span<const double> x, double c);

// Versioned JSON document: config, keypoints, theta vectors, weights, bias.
// See README for the field-by-field description. Doubles round-trip
// bit-exactly.
void save_model(const QuantileModel& model, const std::string& path,
                const std::string& config_hash = "");
QuantileModel load_model(const std::string& path);
std::string model_to_json(const QuantileModel& model, const std::string& config_hash);
QuantileModel model_from_json(const std::string& text);

}  // namespace qlat
