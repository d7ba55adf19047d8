#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qlat/common.hpp"
#include "qlat/data.hpp"
#include "qlat/model.hpp"

namespace qlat {

using QuantileOracle = std::function<double(std::span<const double>, double)>;

// Mean over x and tau of (predict(x,tau) - oracle(x,tau))^2.
double quantile_mse(const QuantileModel& model, const QuantileOracle& oracle,
                    std::span<const std::vector<double>> xs, std::span<const double> taus,
                    Execution exec = Execution::Serial);

// Fraction of x whose quantile curve strictly decreases between any two
// adjacent taus (zero tolerance; the non-crossing constraint is a weak
// inequality).
double crossing_rate(const QuantileModel& model, std::span<const std::vector<double>> xs,
                     std::span<const double> taus, Execution exec = Execution::Serial);

struct RateSubset {
  std::string name;
  std::vector<std::size_t> rows;
  double tau;
};

// max over subsets of |tau_s - empirical_rate(model, D_s, tau_s)|.
double max_quantile_violation(const QuantileModel& model, const Dataset& data,
                              std::span<const RateSubset> subsets,
                              Execution exec = Execution::Serial);

// Smallest order statistic y_(k) with k/n >= tau (the inf definition).
double sample_quantile(std::span<const double> samples, double tau);

// Beta-weighted average of all order statistics:
// w_i = I_{i/n}(alpha, beta) - I_{(i-1)/n}(alpha, beta) with
// alpha = (n+1) tau, beta = (n+1)(1 - tau).
double harrell_davis(std::span<const double> samples, double tau);
std::vector<double> harrell_davis_weights(std::size_t n, double tau);

// (mean, 1.96 * standard error). Requires at least 2 values.
std::pair<double, double> mean_ci(std::span<const double> values);

struct MetricRow {
  std::string metric;
  std::string key;
  double mean = 0.0;
  double ci_half = 0.0;
  bool has_ci = false;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  void add(const std::string& metric, const std::string& key, double value);
  void add_ci(const std::string& metric, const std::string& key,
              std::span<const double> repeats);
};

void write_report_csv(const MetricReport& report, const std::string& path,
                      const std::string& config_hash = "");
void write_report_text(const MetricReport& report, const std::string& path,
                       const std::string& config_hash = "");

}  // namespace qlat
