#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qlat/common.hpp"

namespace qlat {

// Regular grid of knots. theta vectors tied to a Grid are laid out with
// dimension 0 varying fastest: flat index = sum_d multi[d] * stride[d],
// stride[0] = 1, stride[d] = stride[d-1] * knot_count(d-1). Inputs outside
// the knot range are clamped, never extrapolated.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<std::vector<double>> knots);

  // Uniformly spaced knots on [0, 1] in every dimension.
  static Grid unit(const std::vector<std::size_t>& counts);

  std::size_t dims() const { return knots_.size(); }
  std::size_t size() const { return size_; }
  std::size_t knot_count(std::size_t d) const { return knots_[d].size(); }
  const std::vector<double>& knots(std::size_t d) const { return knots_[d]; }
  std::size_t stride(std::size_t d) const { return strides_[d]; }
  std::size_t flat_index(std::span<const std::size_t> multi) const;

 private:
  std::vector<std::vector<double>> knots_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

// Sparse multilinear interpolation weights: at most 2^D entries,
// nonnegative, summing to 1.
struct SparseWeights {
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

// Reusable scratch for the interpolation kernels (avoids per-call
// allocation in the batch loops).
struct LatticeWork {
  std::vector<std::size_t> base;   // left knot index per dim
  std::vector<double> right_w;     // fractional weight toward the right knot
  std::vector<std::size_t> index;  // corner flat indices
  std::vector<double> weight;      // corner weights
  std::vector<double> prefix;      // per-corner product scratch
  std::vector<double> suffix;
};

// Fills work.index / work.weight with the corner weights for x (clamped to
// the grid bounds). Cell choice at interior knots is right-sided.
void interpolation_weights(const Grid& grid, std::span<const double> x, LatticeWork& work);
SparseWeights interpolation_weights(const Grid& grid, std::span<const double> x);

double lattice_evaluate(const Grid& grid, std::span<const double> theta,
                        std::span<const double> x);

// Gradient w.r.t. theta is exactly the interpolation weight vector.
SparseWeights lattice_grad_theta(const Grid& grid, std::span<const double> x);

// Gradient w.r.t. x (right-sided at cell boundaries, zero for clamped
// coordinates).
std::vector<double> lattice_grad_x(const Grid& grid, std::span<const double> theta,
                                   std::span<const double> x);

// Evaluates and, in the same corner sweep, accumulates the per-dimension
// input derivatives into dx (length = dims). Used by the model forward pass.
double lattice_eval_with_input_grad(const Grid& grid, std::span<const double> theta,
                                    std::span<const double> x, LatticeWork& work,
                                    std::span<double> dx);

// Evaluation split along the last dimension: interpolates the remaining
// dimensions at the two bracketing last-dim slices with identical weight
// products and summation order, then combines as lo + t * (hi - lo) clamped
// to [lo, hi]. When adjacent theta pairs along the last dimension are
// nondecreasing this is exactly nondecreasing in c, which is what makes the
// non-crossing guarantee hold at zero tolerance.
double lattice_eval_last_dim_safe(const Grid& grid, std::span<const double> theta,
                                  std::span<const double> leading, double c,
                                  LatticeWork& work);

// 1-D piecewise-linear function: a 1-D lattice. Evaluation clamps to the
// keypoint range and is exact at keypoints.
struct PiecewiseLinearFn {
  std::vector<double> input_keypoints;  // strictly increasing
  std::vector<double> output_values;    // same length
};

double plf_evaluate(const PiecewiseLinearFn& f, double t);
double plf_evaluate(std::span<const double> keypoints, std::span<const double> outputs,
                    double t);

// Segment lookup: left keypoint index and the local weight toward the right
// keypoint, with t clamped to the keypoint range. Right-sided at interior
// keypoints.
struct PlfSegment {
  std::size_t left;
  double t;  // in [0, 1]
};
PlfSegment plf_locate(std::span<const double> keypoints, double t);

}  // namespace qlat
