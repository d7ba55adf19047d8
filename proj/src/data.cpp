#include "qlat/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qlat/rng.hpp"
#include "qlat/special.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

double Dataset::label_std() const {
  if (labels.size() < 2) return 0.0;
  double mean = 0.0;
  for (double y : labels) mean += y;
  mean /= static_cast<double>(labels.size());
  double ss = 0.0;
  for (double y : labels) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / static_cast<double>(labels.size() - 1));
}

std::vector<std::size_t> Dataset::subset_rows(const std::string& value) const {
  std::vector<std::size_t> out;
  if (value == "all") {
    out.resize(rows());
    for (std::size_t i = 0; i < rows(); ++i) out[i] = i;
    return out;
  }
  if (schema.subset_column.empty())
    throw ConfigError("dataset has no subset column; only \"all\" is valid");
  for (std::size_t i = 0; i < rows(); ++i)
    if (subset_ids[i] == value) out.push_back(i);
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
    std::size_t b = 0;
    while (b < c.size() && c[b] == ' ') ++b;
    c.erase(0, b);
  }
  return cells;
}

double parse_double(const std::string& cell, std::size_t line_no,
                    const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("csv line " + std::to_string(line_no) + ": cannot parse '" + cell +
                      "' as a number in column '" + column + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const DataSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open csv file: " + path);
  std::string line;
  std::size_t line_no = 0;
  // header (skipping comment lines)
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw ConfigError("csv file is empty: " + path);

  auto column_of = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw ConfigError("csv file " + path + ": missing column '" + name + "'");
  };

  std::vector<std::size_t> feat_col(schema.features.size());
  for (std::size_t j = 0; j < schema.features.size(); ++j)
    feat_col[j] = column_of(schema.features[j].name);
  const std::size_t label_col = column_of(schema.label);
  std::size_t subset_col = 0;
  const bool has_subset = !schema.subset_column.empty();
  if (has_subset) subset_col = column_of(schema.subset_column);

  // category lookup tables
  std::vector<std::map<std::string, std::size_t>> cat_index(schema.features.size());
  for (std::size_t j = 0; j < schema.features.size(); ++j) {
    if (schema.features[j].kind != FeatureKind::Categorical) continue;
    for (std::size_t c = 0; c < schema.features[j].categories.size(); ++c)
      cat_index[j][schema.features[j].categories[c]] = c;
  }

  Dataset data;
  data.schema.features.clear();
  for (const auto& f : schema.features) data.schema.features.push_back(f);
  data.schema.label = schema.label;
  data.schema.subset_column = schema.subset_column;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ConfigError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    for (std::size_t j = 0; j < schema.features.size(); ++j) {
      const auto& f = schema.features[j];
      const std::string& cell = cells[feat_col[j]];
      if (f.kind == FeatureKind::Continuous) {
        data.features.push_back(parse_double(cell, line_no, f.name));
      } else {
        auto it = cat_index[j].find(cell);
        if (it == cat_index[j].end()) {
          if (f.other_category) {
            it = cat_index[j].find(*f.other_category);
          } else {
            throw ConfigError("csv line " + std::to_string(line_no) +
                              ": unknown category '" + cell + "' in column '" + f.name +
                              "'");
          }
        }
        data.features.push_back(static_cast<double>(it->second));
      }
    }
    data.labels.push_back(parse_double(cells[label_col], line_no, schema.label));
    if (has_subset) data.subset_ids.push_back(cells[subset_col]);
  }
  if (data.labels.empty()) throw ConfigError("csv file has no data rows: " + path);
  return data;
}

void save_csv(const Dataset& data, const std::string& path,
              const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open csv file for writing: " + path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  const bool has_subset = !data.schema.subset_column.empty();
  for (std::size_t j = 0; j < data.schema.features.size(); ++j)
    out << data.schema.features[j].name << ',';
  if (has_subset) out << data.schema.subset_column << ',';
  out << data.schema.label << "\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const auto& f = data.schema.features[j];
      if (f.kind == FeatureKind::Categorical) {
        out << f.categories[static_cast<std::size_t>(row[j])];
      } else {
        out << format_double(row[j]);
      }
      out << ',';
    }
    if (has_subset) out << data.subset_ids[i] << ',';
    out << format_double(data.labels[i]) << "\n";
  }
  if (!out) throw ConfigError("failed writing csv file: " + path);
}

namespace {

Dataset take_rows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.schema = data.schema;
  out.features.reserve(rows.size() * data.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i : rows) {
    const auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[i]);
    if (!data.subset_ids.empty()) out.subset_ids.push_back(data.subset_ids[i]);
  }
  return out;
}

}  // namespace

std::array<Dataset, 3> split(const Dataset& data, SplitMode mode,
                             const std::array<double, 3>& fractions, std::uint64_t seed) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  const std::size_t n = data.rows();
  const auto n0 = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto n1 = static_cast<std::size_t>(std::llround(fractions[1] * n));
  if (n0 == 0 || n1 == 0 || n0 + n1 >= n)
    throw ConfigError("split would produce an empty part");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (mode == SplitMode::IID) {
    Rng rng(seed);
    order = shuffled_indices(n, rng);
  }
  const std::span<const std::size_t> all(order);
  return {take_rows(data, all.subspan(0, n0)), take_rows(data, all.subspan(n0, n1)),
          take_rows(data, all.subspan(n0 + n1))};
}

// --- simulations ------------------------------------------------------------

SimFamily sim_family_from_string(const std::string& name) {
  if (name == "sine-skew") return SimFamily::SineSkew;
  if (name == "griewank") return SimFamily::Griewank;
  if (name == "michalewicz") return SimFamily::Michalewicz;
  if (name == "ackley") return SimFamily::Ackley;
  throw ConfigError("unknown simulation family '" + name + "'");
}

std::string to_string(SimFamily family) {
  switch (family) {
    case SimFamily::SineSkew: return "sine-skew";
    case SimFamily::Griewank: return "griewank";
    case SimFamily::Michalewicz: return "michalewicz";
    case SimFamily::Ackley: return "ackley";
  }
  return "?";
}

int SimSpec::dim() const {
  switch (family) {
    case SimFamily::SineSkew: return 1;
    case SimFamily::Griewank: return 2;
    case SimFamily::Michalewicz: return 1;
    case SimFamily::Ackley: return 9;
  }
  return 0;
}

void SimSpec::validate() const {
  if (!(skew_a > 0.0) || !(skew_b > 0.0))
    throw ConfigError("sim: skew parameters must be positive");
  if (n < 1) throw ConfigError("sim: n must be >= 1");
  if (!(noise_scale > 0.0)) throw ConfigError("sim: noise_scale must be positive");
}

std::pair<double, double> sim_domain(SimFamily family, int d) {
  (void)d;
  switch (family) {
    case SimFamily::SineSkew: return {-1.0, 1.0};
    case SimFamily::Griewank: return {-600.0, 600.0};
    case SimFamily::Michalewicz: return {0.0, M_PI};
    case SimFamily::Ackley: return {-32.768, 32.768};
  }
  return {0.0, 1.0};
}

double sim_mean(SimFamily family, std::span<const double> x) {
  switch (family) {
    case SimFamily::SineSkew:
      return 5.0 * std::sin(M_PI * x[0]);
    case SimFamily::Griewank: {
      double sum = 0.0;
      double prod = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sum += x[i] * x[i] / 4000.0;
        prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
      }
      return 1.0 + sum - prod;
    }
    case SimFamily::Michalewicz: {
      // m = 10
      const double s = std::sin(x[0]);
      const double t = std::sin(x[0] * x[0] / M_PI);
      return -s * std::pow(t, 20.0);
    }
    case SimFamily::Ackley: {
      const double a = 20.0, b = 0.2, c = 2.0 * M_PI;
      double sq = 0.0, cs = 0.0;
      for (double v : x) {
        sq += v * v;
        cs += std::cos(c * v);
      }
      const double n = static_cast<double>(x.size());
      return -a * std::exp(-b * std::sqrt(sq / n)) - std::exp(cs / n) + a + std::exp(1.0);
    }
  }
  return 0.0;
}

double sim_noise_sigma(const SimSpec& spec, std::span<const double> x) {
  // smooth positive modulation of the mean coordinate, normalized to [-1, 1]
  double t = 0.0;
  for (int d = 0; d < spec.dim(); ++d) {
    const auto [lo, hi] = sim_domain(spec.family, d);
    t += 2.0 * (x[d] - lo) / (hi - lo) - 1.0;
  }
  t /= static_cast<double>(spec.dim());
  return spec.noise_scale * (0.75 + 0.5 * std::sin(M_PI * t));
}

double two_piece_cdf(double t, double a, double b, double sigma) {
  const double p_neg = a / (a + b);
  if (t >= 0.0) return p_neg + (1.0 - p_neg) * (2.0 * normal_cdf(t / (b * sigma)) - 1.0);
  return p_neg * 2.0 * normal_cdf(t / (a * sigma));
}

double two_piece_quantile(double tau, double a, double b, double sigma) {
  if (!(tau > 0.0) || !(tau < 1.0)) throw InputError("two_piece_quantile: tau in (0,1)");
  const double p_neg = a / (a + b);
  if (tau <= p_neg) return a * sigma * normal_inv(tau / (2.0 * p_neg));
  return b * sigma * normal_inv(0.5 * (1.0 + (tau - p_neg) / (1.0 - p_neg)));
}

double sim_true_quantile(const SimSpec& spec, std::span<const double> x, double tau) {
  return sim_mean(spec.family, x) +
         two_piece_quantile(tau, spec.skew_a, spec.skew_b, sim_noise_sigma(spec, x));
}

DataSchema sim_schema(const SimSpec& spec) {
  DataSchema schema;
  for (int d = 0; d < spec.dim(); ++d) {
    ColumnSchema col;
    col.name = "x" + std::to_string(d + 1);
    col.kind = FeatureKind::Continuous;
    schema.features.push_back(std::move(col));
  }
  schema.label = "y";
  return schema;
}

std::vector<FeatureSpec> sim_feature_specs(const SimSpec& spec, int calibrator_keypoints) {
  std::vector<FeatureSpec> specs;
  for (int d = 0; d < spec.dim(); ++d) {
    FeatureSpec f;
    f.name = "x" + std::to_string(d + 1);
    f.kind = FeatureKind::Continuous;
    std::tie(f.lower, f.upper) = sim_domain(spec.family, d);
    f.calibrator_keypoints = calibrator_keypoints;
    specs.push_back(std::move(f));
  }
  return specs;
}

namespace {

// Draw order per example: D domain uniforms, one branch uniform, one normal.
void sim_example(const SimSpec& spec, std::size_t i, double* x_out, double* y_out) {
  Rng rng = Rng::stream(spec.seed, i);
  const int D = spec.dim();
  for (int d = 0; d < D; ++d) {
    const auto [lo, hi] = sim_domain(spec.family, d);
    x_out[d] = rng.uniform(lo, hi);
  }
  const std::span<const double> x(x_out, static_cast<std::size_t>(D));
  const double sigma = sim_noise_sigma(spec, x);
  const double u = rng.uniform();
  const double z = std::fabs(rng.normal());
  const double p_pos = spec.skew_b / (spec.skew_a + spec.skew_b);
  const double eps =
      u < p_pos ? spec.skew_b * sigma * z : -spec.skew_a * sigma * z;
  *y_out = sim_mean(spec.family, x) + eps;
}

}  // namespace

Dataset generate_sim(const SimSpec& spec, Execution exec) {
  spec.validate();
  Dataset data;
  data.schema = sim_schema(spec);
  const int D = spec.dim();
  data.features.resize(static_cast<std::size_t>(spec.n) * D);
  data.labels.resize(spec.n);
  if (exec == Execution::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < spec.n; ++i)
      sim_example(spec, static_cast<std::size_t>(i), data.features.data() + i * D,
                  &data.labels[i]);
  } else {
    for (long long i = 0; i < spec.n; ++i)
      sim_example(spec, static_cast<std::size_t>(i), data.features.data() + i * D,
                  &data.labels[i]);
  }
  return data;
}

std::vector<double> sample_exponential(double lambda, int n, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw InputError("sample_exponential: lambda must be positive");
  Rng rng(seed);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = -std::log1p(-rng.uniform()) / lambda;
  return out;
}

double exponential_quantile(double lambda, double tau) {
  if (!(lambda > 0.0)) throw InputError("exponential_quantile: lambda must be positive");
  if (!(tau >= 0.0) || !(tau < 1.0)) throw InputError("exponential_quantile: tau in [0,1)");
  return -std::log1p(-tau) / lambda;
}

}  // namespace qlat
