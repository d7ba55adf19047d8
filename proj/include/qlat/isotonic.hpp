#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qlat/lattice.hpp"

namespace qlat {

// Exact L2 projection onto the nondecreasing cone (pool adjacent violators).
void isotonic_fit(std::span<double> values);

// Dimensions of a lattice required nondecreasing.
struct MonotoneSpec {
  std::vector<std::size_t> dims;
};

struct ProjectOptions {
  double tol = 1e-9;
  int max_sweeps = 1000;
};

// Euclidean projection of theta onto the set where every neighboring pair
// along each monotone dimension is nondecreasing. Dykstra's alternating
// projections over the per-dimension chain sets; each chain is solved
// exactly by pool-adjacent-violators. A single monotone dimension needs one
// pass and is exact. Throws NumericalError if the sweep limit is reached.
std::vector<double> project_monotone(const Grid& grid, std::span<const double> theta,
                                     const MonotoneSpec& spec,
                                     const ProjectOptions& opt = {});

struct MonotoneCheck {
  bool ok = true;
  double worst = 0.0;     // largest positive violation theta[i] - theta[i + stride]
  std::size_t dim = 0;    // dimension of the worst pair
  std::size_t index = 0;  // flat index of the lower element of the worst pair
};

MonotoneCheck check_monotone(const Grid& grid, std::span<const double> theta,
                             const MonotoneSpec& spec, double tol);

}  // namespace qlat
