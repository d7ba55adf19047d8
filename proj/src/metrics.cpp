#include "qlat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qlat/rates.hpp"
#include "qlat/special.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

namespace {

constexpr std::size_t kChunk = 16;

// Chunked fixed-order mean over xs of a per-x summary value.
template <typename PerX>
double chunked_mean(std::size_t n, Execution exec, PerX&& per_x) {
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> chunk_sum(nchunks, 0.0);
  auto run = [&](std::size_t c, PredictWork& ws) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += per_x(i, ws);
    chunk_sum[c] = acc;
  };
  if (exec == Execution::Parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      PredictWork ws;
#pragma omp for schedule(static)
      for (long long c = 0; c < static_cast<long long>(nchunks); ++c)
        run(static_cast<std::size_t>(c), ws);
    }
#else
    exec = Execution::Serial;
#endif
  }
  if (exec == Execution::Serial) {
    PredictWork ws;
    for (std::size_t c = 0; c < nchunks; ++c) run(c, ws);
  }
  double total = 0.0;
  for (double s : chunk_sum) total += s;
  return total / static_cast<double>(n);
}

}  // namespace

double quantile_mse(const QuantileModel& model, const QuantileOracle& oracle,
                    std::span<const std::vector<double>> xs, std::span<const double> taus,
                    Execution exec) {
  if (xs.empty() || taus.empty()) throw InputError("quantile_mse: empty inputs");
  return chunked_mean(xs.size(), exec, [&](std::size_t i, PredictWork& ws) {
    double acc = 0.0;
    for (double tau : taus) {
      const double d = predict(model, xs[i], tau, ws) - oracle(xs[i], tau);
      acc += d * d;
    }
    return acc / static_cast<double>(taus.size());
  });
}

double crossing_rate(const QuantileModel& model, std::span<const std::vector<double>> xs,
                     std::span<const double> taus, Execution exec) {
  if (xs.empty() || taus.size() < 2) throw InputError("crossing_rate: empty inputs");
  for (std::size_t t = 0; t + 1 < taus.size(); ++t)
    if (!(taus[t] < taus[t + 1])) throw InputError("crossing_rate: taus must be sorted");
  return chunked_mean(xs.size(), exec, [&](std::size_t i, PredictWork& ws) {
    double prev = predict(model, xs[i], taus[0], ws);
    for (std::size_t t = 1; t < taus.size(); ++t) {
      const double cur = predict(model, xs[i], taus[t], ws);
      if (cur < prev) return 1.0;
      prev = cur;
    }
    return 0.0;
  });
}

double max_quantile_violation(const QuantileModel& model, const Dataset& data,
                              std::span<const RateSubset> subsets, Execution exec) {
  if (subsets.empty()) throw ConfigError("max_quantile_violation: no subsets");
  double worst = 0.0;
  for (const auto& s : subsets) {
    if (s.rows.empty())
      throw ConfigError("max_quantile_violation: empty subset '" + s.name + "'");
    const double rate = empirical_rate(model, data, s.rows, s.tau, exec);
    worst = std::max(worst, std::fabs(s.tau - rate));
  }
  return worst;
}

double sample_quantile(std::span<const double> samples, double tau) {
  if (samples.empty()) throw InputError("sample_quantile: empty sample");
  if (!(tau > 0.0) || !(tau <= 1.0)) throw InputError("sample_quantile: tau in (0,1]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double nt = static_cast<double>(sorted.size()) * tau;
  std::size_t k = static_cast<std::size_t>(std::ceil(nt));
  if (k < 1) k = 1;
  if (k > sorted.size()) k = sorted.size();
  return sorted[k - 1];
}

std::vector<double> harrell_davis_weights(std::size_t n, double tau) {
  if (n == 0) throw InputError("harrell_davis: empty sample");
  if (!(tau > 0.0) || !(tau < 1.0)) throw InputError("harrell_davis: tau in (0,1)");
  const double a = (static_cast<double>(n) + 1.0) * tau;
  const double b = (static_cast<double>(n) + 1.0) * (1.0 - tau);
  std::vector<double> w(n);
  double prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double cur =
        reg_inc_beta(a, b, static_cast<double>(i) / static_cast<double>(n));
    w[i - 1] = cur - prev;
    prev = cur;
  }
  return w;
}

double harrell_davis(std::span<const double> samples, double tau) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> w = harrell_davis_weights(sorted.size(), tau);
  double acc = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) acc += w[i] * sorted[i];
  return acc;
}

std::pair<double, double> mean_ci(std::span<const double> values) {
  if (values.size() < 2) throw InputError("mean_ci: need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double stderr_ =
      std::sqrt(ss / static_cast<double>(values.size() - 1)) /
      std::sqrt(static_cast<double>(values.size()));
  return {mean, 1.96 * stderr_};
}

void MetricReport::add(const std::string& metric, const std::string& key, double value) {
  rows.push_back(MetricRow{metric, key, value, 0.0, false});
}

void MetricReport::add_ci(const std::string& metric, const std::string& key,
                          std::span<const double> repeats) {
  if (repeats.size() == 1) {
    rows.push_back(MetricRow{metric, key, repeats[0], 0.0, false});
    return;
  }
  const auto [mean, half] = mean_ci(repeats);
  rows.push_back(MetricRow{metric, key, mean, half, true});
}

void write_report_csv(const MetricReport& report, const std::string& path,
                      const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open report file for writing: " + path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "metric,key,mean,ci95_half\n";
  for (const auto& row : report.rows) {
    out << row.metric << ',' << row.key << ',' << format_double(row.mean) << ','
        << (row.has_ci ? format_double(row.ci_half) : "") << "\n";
  }
}

void write_report_text(const MetricReport& report, const std::string& path,
                       const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open report file for writing: " + path);
  if (!config_hash.empty()) out << "config_hash: " << config_hash << "\n";
  for (const auto& row : report.rows) {
    out << row.metric;
    if (!row.key.empty()) out << " [" << row.key << "]";
    out << ": " << row.mean;
    if (row.has_ci) out << " +/- " << row.ci_half;
    out << "\n";
  }
}

}  // namespace qlat
