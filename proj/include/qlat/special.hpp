#pragma once

namespace qlat {

// ln Gamma(x) for x > 0 (Lanczos, ~15 significant digits).
double log_gamma(double x);

// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
// Continued fraction (modified Lentz) with the symmetry switch at
// x > (a+1)/(a+b+2); absolute error below 1e-10 over the supported range.
double reg_inc_beta(double a, double b, double x);

// Standard normal CDF and its inverse. The inverse uses a rational
// first pass refined by Halley steps; accurate to full double precision
// away from the endpoints.
double normal_cdf(double x);
double normal_inv(double p);

}  // namespace qlat
