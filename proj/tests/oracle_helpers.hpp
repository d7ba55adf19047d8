// Independent oracles used by the tests: finite differences, brute-force
// projection, pinball-minimizer search. These deliberately avoid the library
// code paths they are checking.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

// Central-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double up = f(x);
    x[i] = xi - h;
    const double down = f(x);
    x[i] = xi;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want,
                          double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double denom = std::max(floor, std::fabs(want[i]));
    worst = std::max(worst, std::fabs(got[i] - want[i]) / denom);
  }
  return worst;
}

// Euclidean projection onto {v : v[i] <= v[j] for every pair}, by
// enumerating active sets. Equality-constrained projections are means over
// the connected components of the active pairs; the feasible candidate with
// the smallest distance is the projection.
inline std::vector<double> qp_project(const std::vector<double>& x,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t n = x.size();
  const std::size_t m = pairs.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> parent(n);

  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };

  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t c = 0; c < m; ++c) {
      if ((mask >> c) & 1u) parent[find(pairs[c].first)] = find(pairs[c].second);
    }
    std::vector<double> sum(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = find(i);
      sum[r] += x[i];
      count[r] += 1;
    }
    std::vector<double> cand(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = find(i);
      cand[i] = sum[r] / static_cast<double>(count[r]);
    }
    bool feasible = true;
    for (const auto& [lo, hi] : pairs) {
      if (cand[lo] > cand[hi] + 1e-12) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += (cand[i] - x[i]) * (cand[i] - x[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = std::move(cand);
    }
  }
  return best;
}

// Minimizer over constants of the total pinball loss; attained at a sample
// value, so searching the sample suffices.
inline double pinball_argmin(const std::vector<double>& samples, double tau) {
  std::vector<double> cands(samples.begin(), samples.end());
  std::sort(cands.begin(), cands.end());
  double best = cands.front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double c : cands) {
    double loss = 0.0;
    for (double y : samples) {
      const double d = y - c;
      loss += std::max(tau * d, (tau - 1.0) * d);
    }
    if (loss < best_loss - 1e-12) {
      best_loss = loss;
      best = c;
    }
  }
  return best;
}

// Kolmogorov distance between the sample and Uniform(0,1).
inline double ks_uniform(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    d = std::max(d, std::fabs((i + 1) / n - samples[i]));
    d = std::max(d, std::fabs(samples[i] - i / n));
  }
  return d;
}

// Empirical quantile by linear order statistics (independent of the library
// definition; used only for Monte Carlo tolerance checks).
inline double mc_quantile(std::vector<double> samples, double tau) {
  std::sort(samples.begin(), samples.end());
  const std::size_t k =
      std::min(samples.size() - 1,
               static_cast<std::size_t>(tau * static_cast<double>(samples.size())));
  return samples[k];
}

}  // namespace oracle
