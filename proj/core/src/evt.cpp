#include "glx/evt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glx/parallel.hpp"

namespace glx {

ScalingConstants scaling_constants(double g0, double N) {
    if (!(N >= 3)) throw std::domain_error("scaling_constants: N >= 3 required");
    if (!(g0 > 0)) throw std::domain_error("scaling_constants: g0 > 0 required");
    ScalingConstants sc;
    sc.g0 = g0;
    sc.N = N;
    const double logN = std::log(N);
    const double root = std::sqrt(2.0 * logN);
    sc.b = std::sqrt(g0) * (root - (std::log(logN) + std::log(4.0 * M_PI)) / (2.0 * root));
    sc.a = g0 / sc.b;
    return sc;
}

double limit_cdf(double z, double delta, int d) {
    if (!(delta >= 0.0 && delta < 0.5)) throw std::domain_error("limit_cdf: delta in [0, 1/2)");
    return std::exp(-std::exp(-z + d * std::log(1.0 - 2.0 * delta)));
}

double gumbel_cdf(double z) { return std::exp(-std::exp(-z)); }

MaximaSample simulate_maxima(const GaussianSampler& sampler, const BoxDomain& domain, double g0,
                             MaximaMode mode, int replicates, std::uint64_t seed, int workers,
                             double rescale_count) {
    if (sampler.size() != domain.volume())
        throw std::invalid_argument("simulate_maxima: sampler size does not match the domain");
    std::vector<std::int64_t> subset;
    if (mode == MaximaMode::Bulk) {
        subset = bulk_indices(domain);
        if (subset.empty()) throw std::invalid_argument("simulate_maxima: empty bulk");
    }
    const double M = rescale_count > 0
                         ? rescale_count
                         : (mode == MaximaMode::FullBox ? static_cast<double>(domain.volume())
                                                        : static_cast<double>(subset.size()));
    const ScalingConstants sc = scaling_constants(g0, M);

    MaximaSample out;
    out.mode = mode;
    out.seed = seed;
    out.rescale_count = M;
    out.g0 = g0;
    out.z.assign(static_cast<std::size_t>(replicates), 0.0);

    parallel_for_chunks(replicates, 16, workers, [&](std::int64_t b, std::int64_t e, std::int64_t) {
        Eigen::VectorXd field;
        for (std::int64_t r = b; r < e; ++r) {
            sampler.sample_into(seed, r, field);
            double mx = -std::numeric_limits<double>::infinity();
            if (mode == MaximaMode::FullBox) {
                mx = field.maxCoeff();
            } else {
                for (auto idx : subset) mx = std::max(mx, field(static_cast<Eigen::Index>(idx)));
            }
            out.z[static_cast<std::size_t>(r)] = (mx - sc.b) / sc.a;
        }
    });
    return out;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& reference_cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double ks = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = reference_cdf(sample[i]);
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    return ks;
}

}  // namespace glx
