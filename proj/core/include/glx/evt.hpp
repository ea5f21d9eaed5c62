#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "glx/gaussian.hpp"
#include "glx/lattice.hpp"

namespace glx {

// Centering b_N and scaling a_N = g0 / b_N of the Gumbel limit.
struct ScalingConstants {
    double g0 = 1;
    double N = 0;
    double a = 0;
    double b = 0;
    double u(double z) const { return b + a * z; }
};
ScalingConstants scaling_constants(double g0, double N);

// exp(-e^{-z + d log(1-2 delta)}); delta = 0 is the standard Gumbel.
double limit_cdf(double z, double delta, int d);
double gumbel_cdf(double z);

enum class MaximaMode { FullBox, Bulk };

struct MaximaSample {
    std::vector<double> z;  // scaled maxima per replicate
    MaximaMode mode = MaximaMode::FullBox;
    std::uint64_t seed = 0;
    double rescale_count = 0;  // M used for (a_M, b_M)
    double g0 = 1;
};

// Per replicate, z = (max over the selected sites - b_M)/a_M. rescale_count
// overrides M (0 picks N for the full box, the exact bulk count m_N in bulk
// mode). Maxima are taken in the sampling pass; full fields are not stored.
MaximaSample simulate_maxima(const GaussianSampler& sampler, const BoxDomain& domain, double g0,
                             MaximaMode mode, int replicates, std::uint64_t seed, int workers = 1,
                             double rescale_count = 0);

// Exact Kolmogorov statistic sup |F_hat - F| against a reference CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& reference_cdf);

}  // namespace glx
