#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlat/common.hpp"
#include "qlat/model.hpp"

namespace qlat {

struct ColumnSchema {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  std::vector<std::string> categories;        // categorical only
  std::optional<std::string> other_category;  // unknown values map here if set
};

struct DataSchema {
  std::vector<ColumnSchema> features;
  std::string label = "y";
  std::string subset_column;  // optional; empty = none
};

// Row-major feature matrix. Categorical cells hold the category index.
struct Dataset {
  DataSchema schema;
  std::vector<double> features;
  std::vector<double> labels;
  std::vector<std::string> subset_ids;  // parallel to labels when subset_column set

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return schema.features.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols(), cols()};
  }
  double label_std() const;
  // Row indices whose subset id equals `value`; all rows if column unset and
  // value == "all".
  std::vector<std::size_t> subset_rows(const std::string& value) const;
};

// Strict CSV reader: header required, '.' decimal separator, no quoting.
// Lines starting with '#' are skipped (our writers put the config hash
// there). Any unparseable cell fails the load with its line number.
Dataset load_csv(const std::string& path, const DataSchema& schema);
void save_csv(const Dataset& data, const std::string& path,
              const std::string& config_hash = "");

enum class SplitMode { IID, Ordered };

// Partition into train/val/test. Fractions must sum to 1; every part must be
// nonempty. Ordered mode keeps row order with earlier rows in train.
std::array<Dataset, 3> split(const Dataset& data, SplitMode mode,
                             const std::array<double, 3>& fractions,
                             std::uint64_t seed = 0);

enum class SimFamily { SineSkew, Griewank, Michalewicz, Ackley };

SimFamily sim_family_from_string(const std::string& name);
std::string to_string(SimFamily family);

// Simulation with closed-form conditional quantiles. x is uniform on the
// family's canonical domain; y = m(x) + eps where eps is two-piece
// half-normal noise: with probability b/(a+b) a positive half-normal scaled
// by b*s(x), otherwise a negative half-normal scaled by a*s(x). s(x) is a
// smooth positive modulation (see sim_noise_sigma). a = b gives symmetric
// noise with median m(x).
struct SimSpec {
  SimFamily family = SimFamily::SineSkew;
  double skew_a = 1.0;
  double skew_b = 1.0;
  int n = 100;
  std::uint64_t seed = 0;
  double noise_scale = 1.0;

  int dim() const;
  void validate() const;
};

// Per-example counter-based generation: example i draws from
// Rng::stream(seed, i), so output is identical for any thread count.
Dataset generate_sim(const SimSpec& spec, Execution exec = Execution::Serial);

double sim_mean(SimFamily family, std::span<const double> x);
std::pair<double, double> sim_domain(SimFamily family, int d);
double sim_noise_sigma(const SimSpec& spec, std::span<const double> x);

// Exact conditional tau-quantile of the generated distribution.
double sim_true_quantile(const SimSpec& spec, std::span<const double> x, double tau);

// Quantile of the two-piece noise itself (zero-centered).
double two_piece_quantile(double tau, double a, double b, double sigma);
double two_piece_cdf(double t, double a, double b, double sigma);

// Model feature specs matching a simulation's input columns.
std::vector<FeatureSpec> sim_feature_specs(const SimSpec& spec, int calibrator_keypoints);
DataSchema sim_schema(const SimSpec& spec);

// Inverse-CDF sampling from exp(lambda); q(tau) = -ln(1-tau)/lambda.
std::vector<double> sample_exponential(double lambda, int n, std::uint64_t seed);
double exponential_quantile(double lambda, double tau);

}  // namespace qlat
