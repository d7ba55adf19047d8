#include "qlat/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qlat/common.hpp"

namespace qlat {

void isotonic_fit(std::span<double> values) {
  const std::size_t n = values.size();
  if (n <= 1) return;
  // Block stack of (mean, count).
  static thread_local std::vector<double> mean;
  static thread_local std::vector<std::size_t> count;
  mean.clear();
  count.clear();
  for (std::size_t i = 0; i < n; ++i) {
    mean.push_back(values[i]);
    count.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
      const double m2 = mean.back();
      const std::size_t c2 = count.back();
      mean.pop_back();
      count.pop_back();
      const double m1 = mean.back();
      const std::size_t c1 = count.back();
      mean.back() = (m1 * c1 + m2 * c2) / static_cast<double>(c1 + c2);
      count.back() = c1 + c2;
    }
  }
  std::size_t pos = 0;
  for (std::size_t b = 0; b < mean.size(); ++b) {
    for (std::size_t k = 0; k < count[b]; ++k) values[pos++] = mean[b];
  }
}

namespace {

// Applies fn to every fiber of `data` along dimension d (gather/scatter
// through a scratch buffer).
template <typename Fn>
void for_each_fiber(const Grid& grid, std::size_t d, std::vector<double>& data,
                    std::vector<double>& scratch, Fn&& fn) {
  const std::size_t len = grid.knot_count(d);
  const std::size_t stride = grid.stride(d);
  const std::size_t block = stride * len;
  const std::size_t n = grid.size();
  scratch.resize(len);
  for (std::size_t outer = 0; outer < n; outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      const std::size_t start = outer + inner;
      for (std::size_t k = 0; k < len; ++k) scratch[k] = data[start + k * stride];
      fn(std::span<double>(scratch.data(), len));
      for (std::size_t k = 0; k < len; ++k) data[start + k * stride] = scratch[k];
    }
  }
}

void validate_spec(const Grid& grid, const MonotoneSpec& spec) {
  for (std::size_t d : spec.dims) {
    if (d >= grid.dims()) throw InputError("monotone spec: dimension out of range");
  }
}

}  // namespace

MonotoneCheck check_monotone(const Grid& grid, std::span<const double> theta,
                             const MonotoneSpec& spec, double tol) {
  if (theta.size() != grid.size()) throw InputError("check_monotone: theta size mismatch");
  validate_spec(grid, spec);
  MonotoneCheck result;
  for (std::size_t d : spec.dims) {
    const std::size_t len = grid.knot_count(d);
    const std::size_t stride = grid.stride(d);
    const std::size_t block = stride * len;
    for (std::size_t outer = 0; outer < grid.size(); outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t start = outer + inner;
        for (std::size_t k = 0; k + 1 < len; ++k) {
          const double gap = theta[start + k * stride] - theta[start + (k + 1) * stride];
          if (gap > result.worst) {
            result.worst = gap;
            result.dim = d;
            result.index = start + k * stride;
          }
        }
      }
    }
  }
  result.ok = result.worst <= tol;
  return result;
}

std::vector<double> project_monotone(const Grid& grid, std::span<const double> theta,
                                     const MonotoneSpec& spec, const ProjectOptions& opt) {
  if (theta.size() != grid.size()) throw InputError("project_monotone: theta size mismatch");
  if (!(opt.tol > 0.0)) throw InputError("project_monotone: tol must be positive");
  validate_spec(grid, spec);
  std::vector<double> y(theta.begin(), theta.end());
  if (spec.dims.empty()) return y;

  std::vector<double> scratch;
  if (spec.dims.size() == 1) {
    for_each_fiber(grid, spec.dims[0], y, scratch,
                   [](std::span<double> fiber) { isotonic_fit(fiber); });
    return y;
  }

  // Dykstra corrections, one per constraint set (per monotone dimension).
  std::vector<std::vector<double>> corr(spec.dims.size(),
                                        std::vector<double>(y.size(), 0.0));
  std::vector<double> z(y.size());
  bool converged = false;
  for (int sweep = 0; sweep < opt.max_sweeps && !converged; ++sweep) {
    double delta = 0.0;
    for (std::size_t k = 0; k < spec.dims.size(); ++k) {
      for (std::size_t i = 0; i < y.size(); ++i) z[i] = y[i] + corr[k][i];
      std::vector<double> projected = z;
      for_each_fiber(grid, spec.dims[k], projected, scratch,
                     [](std::span<double> fiber) { isotonic_fit(fiber); });
      for (std::size_t i = 0; i < y.size(); ++i) {
        corr[k][i] = z[i] - projected[i];
        delta = std::max(delta, std::fabs(projected[i] - y[i]));
      }
      y = std::move(projected);
    }
    const MonotoneCheck check = check_monotone(grid, y, spec, opt.tol);
    converged = check.ok && delta <= opt.tol;
  }
  if (!converged) {
    const MonotoneCheck check = check_monotone(grid, y, spec, opt.tol);
    throw NumericalError("project_monotone did not converge; max residual " +
                         std::to_string(check.worst));
  }
  // polish to exact feasibility with plain cyclic PAV passes; moves the
  // point by at most the residual infeasibility, and a feasible point
  // re-projects to itself bit-exactly (idempotence)
  for (int pass = 0; pass < 50; ++pass) {
    if (check_monotone(grid, y, spec, 0.0).ok) break;
    for (std::size_t d : spec.dims)
      for_each_fiber(grid, d, y, scratch,
                     [](std::span<double> fiber) { isotonic_fit(fiber); });
  }
  return y;
}

}  // namespace qlat
