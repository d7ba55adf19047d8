#include "qlat/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "qlat/common.hpp"

namespace qlat {

namespace {

// Cell holding x: largest l with knots[l] <= x, clamped to a valid cell.
// x exactly on an interior knot lands in the cell to its right.
std::size_t locate_cell(const std::vector<double>& v, double x) {
  if (x <= v.front()) return 0;
  if (x >= v[v.size() - 2]) return v.size() - 2;
  return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) - 1;
}

}  // namespace

Grid::Grid(std::vector<std::vector<double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw InputError("Grid: at least one dimension required");
  if (knots_.size() > 20) throw InputError("Grid: too many dimensions (max 20)");
  size_ = 1;
  strides_.resize(knots_.size());
  for (std::size_t d = 0; d < knots_.size(); ++d) {
    const auto& v = knots_[d];
    if (v.size() < 2) throw InputError("Grid: each dimension needs at least 2 knots");
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (!(v[i] < v[i + 1])) throw InputError("Grid: knots must be strictly increasing");
    }
    if (!std::isfinite(v.front()) || !std::isfinite(v.back()))
      throw InputError("Grid: knots must be finite");
    strides_[d] = size_;
    size_ *= v.size();
  }
}

Grid Grid::unit(const std::vector<std::size_t>& counts) {
  std::vector<std::vector<double>> knots(counts.size());
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d] < 2) throw InputError("Grid::unit: knot count must be >= 2");
    knots[d].resize(counts[d]);
    for (std::size_t i = 0; i < counts[d]; ++i)
      knots[d][i] = static_cast<double>(i) / static_cast<double>(counts[d] - 1);
  }
  return Grid(std::move(knots));
}

std::size_t Grid::flat_index(std::span<const std::size_t> multi) const {
  if (multi.size() != dims()) throw InputError("Grid::flat_index: dimension mismatch");
  std::size_t idx = 0;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (multi[d] >= knots_[d].size()) throw InputError("Grid::flat_index: index out of range");
    idx += multi[d] * strides_[d];
  }
  return idx;
}

void interpolation_weights(const Grid& grid, std::span<const double> x, LatticeWork& work) {
  const std::size_t D = grid.dims();
  if (x.size() != D) throw InputError("interpolation_weights: dimension mismatch");
  work.base.resize(D);
  work.right_w.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& v = grid.knots(d);
    const double xc = std::clamp(x[d], v.front(), v.back());
    const std::size_t l = locate_cell(v, xc);
    work.base[d] = l;
    work.right_w[d] = (xc - v[l]) / (v[l + 1] - v[l]);
  }
  const std::size_t corners = std::size_t{1} << D;
  work.index.resize(corners);
  work.weight.resize(corners);
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t d = 0; d < D; ++d) {
      const bool hi = (mask >> d) & 1u;
      w *= hi ? work.right_w[d] : 1.0 - work.right_w[d];
      idx += (work.base[d] + (hi ? 1 : 0)) * grid.stride(d);
    }
    work.index[mask] = idx;
    work.weight[mask] = w;
  }
}

SparseWeights interpolation_weights(const Grid& grid, std::span<const double> x) {
  LatticeWork work;
  interpolation_weights(grid, x, work);
  return SparseWeights{std::move(work.index), std::move(work.weight)};
}

double lattice_evaluate(const Grid& grid, std::span<const double> theta,
                        std::span<const double> x) {
  if (theta.size() != grid.size()) throw InputError("lattice_evaluate: theta size mismatch");
  LatticeWork work;
  interpolation_weights(grid, x, work);
  double acc = 0.0;
  for (std::size_t i = 0; i < work.index.size(); ++i)
    acc += work.weight[i] * theta[work.index[i]];
  return acc;
}

SparseWeights lattice_grad_theta(const Grid& grid, std::span<const double> x) {
  return interpolation_weights(grid, x);
}

double lattice_eval_with_input_grad(const Grid& grid, std::span<const double> theta,
                                    std::span<const double> x, LatticeWork& work,
                                    std::span<double> dx) {
  const std::size_t D = grid.dims();
  interpolation_weights(grid, x, work);
  work.prefix.resize(D + 1);
  work.suffix.resize(D + 1);
  for (std::size_t d = 0; d < D; ++d) dx[d] = 0.0;

  double value = 0.0;
  const std::size_t corners = std::size_t{1} << D;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    const double th = theta[work.index[mask]];
    value += work.weight[mask] * th;
    // prefix/suffix products of the per-dim weights let us drop one factor
    // at a time without division
    work.prefix[0] = 1.0;
    for (std::size_t d = 0; d < D; ++d) {
      const bool hi = (mask >> d) & 1u;
      work.prefix[d + 1] = work.prefix[d] * (hi ? work.right_w[d] : 1.0 - work.right_w[d]);
    }
    work.suffix[D] = 1.0;
    for (std::size_t d = D; d-- > 0;) {
      const bool hi = (mask >> d) & 1u;
      work.suffix[d] = work.suffix[d + 1] * (hi ? work.right_w[d] : 1.0 - work.right_w[d]);
    }
    for (std::size_t d = 0; d < D; ++d) {
      const auto& v = grid.knots(d);
      if (x[d] < v.front() || x[d] > v.back()) continue;  // clamped: locally constant
      const double h = v[work.base[d] + 1] - v[work.base[d]];
      const double sign = ((mask >> d) & 1u) ? 1.0 : -1.0;
      dx[d] += th * sign / h * work.prefix[d] * work.suffix[d + 1];
    }
  }
  return value;
}

std::vector<double> lattice_grad_x(const Grid& grid, std::span<const double> theta,
                                   std::span<const double> x) {
  if (theta.size() != grid.size()) throw InputError("lattice_grad_x: theta size mismatch");
  LatticeWork work;
  std::vector<double> dx(grid.dims());
  lattice_eval_with_input_grad(grid, theta, x, work, dx);
  return dx;
}

double lattice_eval_last_dim_safe(const Grid& grid, std::span<const double> theta,
                                  std::span<const double> leading, double c,
                                  LatticeWork& work) {
  const std::size_t D = grid.dims();
  if (leading.size() + 1 != D)
    throw InputError("lattice_eval_last_dim_safe: dimension mismatch");
  const std::size_t F = D - 1;
  work.base.resize(F);
  work.right_w.resize(F);
  for (std::size_t d = 0; d < F; ++d) {
    const auto& v = grid.knots(d);
    const double xc = std::clamp(leading[d], v.front(), v.back());
    const std::size_t l = locate_cell(v, xc);
    work.base[d] = l;
    work.right_w[d] = (xc - v[l]) / (v[l + 1] - v[l]);
  }
  const auto& vt = grid.knots(F);
  const double cc = std::clamp(c, vt.front(), vt.back());
  const std::size_t lt = locate_cell(vt, cc);
  const double t = (cc - vt[lt]) / (vt[lt + 1] - vt[lt]);
  const std::size_t stride_t = grid.stride(F);

  double lo = 0.0;
  double hi = 0.0;
  const std::size_t corners = std::size_t{1} << F;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t d = 0; d < F; ++d) {
      const bool up = (mask >> d) & 1u;
      w *= up ? work.right_w[d] : 1.0 - work.right_w[d];
      idx += (work.base[d] + (up ? 1 : 0)) * grid.stride(d);
    }
    lo += w * theta[idx + lt * stride_t];
    hi += w * theta[idx + (lt + 1) * stride_t];
  }
  if (t == 0.0) return lo;
  if (t == 1.0) return hi;
  const double v = lo + t * (hi - lo);
  return std::clamp(v, std::min(lo, hi), std::max(lo, hi));
}

PlfSegment plf_locate(std::span<const double> keypoints, double t) {
  const std::size_t n = keypoints.size();
  if (n < 2) throw InputError("plf: at least 2 keypoints required");
  const double tc = std::clamp(t, keypoints.front(), keypoints.back());
  std::size_t l;
  if (tc <= keypoints.front()) {
    l = 0;
  } else if (tc >= keypoints[n - 2]) {
    l = n - 2;
  } else {
    l = static_cast<std::size_t>(
            std::upper_bound(keypoints.begin(), keypoints.end(), tc) - keypoints.begin()) -
        1;
  }
  return PlfSegment{l, (tc - keypoints[l]) / (keypoints[l + 1] - keypoints[l])};
}

double plf_evaluate(std::span<const double> keypoints, std::span<const double> outputs,
                    double t) {
  if (keypoints.size() != outputs.size())
    throw InputError("plf: keypoint/output length mismatch");
  const PlfSegment seg = plf_locate(keypoints, t);
  const double lo = outputs[seg.left];
  const double hi = outputs[seg.left + 1];
  // exact at keypoints; the clamp keeps rounding from overshooting the
  // segment range, which keeps monotone calibrators exactly monotone
  if (seg.t == 0.0) return lo;
  if (seg.t == 1.0) return hi;
  const double v = lo + seg.t * (hi - lo);
  return std::clamp(v, std::min(lo, hi), std::max(lo, hi));
}

double plf_evaluate(const PiecewiseLinearFn& f, double t) {
  return plf_evaluate(f.input_keypoints, f.output_values, t);
}

}  // namespace qlat
