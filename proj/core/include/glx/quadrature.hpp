#pragma once

#include <functional>

namespace glx {

// Adaptive Gauss-Kronrod on [a, b]. `abs_floor` stops refinement once the
// absolute error estimate is below it, independently of the relative target.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double abs_floor = 0.0);

// integral_0^inf f(t) dt for integrands with algebraic decay t^{-p}, p > 1:
// plain adaptive panel on [0, T], then the substitution t = 1/u^2 turns the
// tail into a smooth integral on (0, 1/sqrt(T)].
double integrate_semi_infinite_algebraic(const std::function<double(double)>& f, double T,
                                         double rel_tol = 1e-12);

// P(X > u1, Y > u2) for a centered bivariate normal given by variances and
// covariance, by nested adaptive quadrature on the rational map of the
// quarter-plane. Refinement stops at max(rel_tol * estimate, abs_floor).
double bivariate_normal_tail_quadrature(double var1, double var2, double cov, double u1,
                                        double u2, double rel_tol = 1e-9,
                                        double abs_floor = 1e-10);

}  // namespace glx
