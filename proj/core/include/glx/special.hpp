#pragma once

#include <span>
#include <vector>

namespace glx {

double norm_pdf(double x);
double norm_cdf(double x);
// Upper tail P(N(0,1) > x), accurate in both tails via erfc.
double norm_tail(double x);
// Inverse of norm_tail (upper-tail quantile).
double norm_tail_inverse(double p);

// Two-sided Mills bracket (1 - 1/t^2) phi(t)/t <= norm_tail(t) <= phi(t)/t.
// The bracket is only defined for t > 0; `valid` is false otherwise and the
// exact value is still usable.
struct MillsBracket {
    double exact = 0;
    double lower = 0;
    double upper = 0;
    bool valid = false;
};
MillsBracket mills_bracket(double t);

// Exponentially scaled modified Bessel functions of the first kind:
// out[n] = e^{-x} I_n(x) for n = 0..nmax, x >= 0. Backward (Miller)
// recurrence normalized with I_0 + 2 sum I_k = e^x; large-x asymptotic
// series once the recurrence would be wasteful.
void scaled_bessel_i(double x, int nmax, std::span<double> out);
double scaled_bessel_i0(double x);

// Gauss-Hermite rule for integrals against e^{-x^2} (Golub-Welsch nodes).
struct GaussHermite {
    std::vector<double> x;
    std::vector<double> w;
    static const GaussHermite& get(int n);
};

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;
    static const GaussLegendre& get(int n);
};

}  // namespace glx
