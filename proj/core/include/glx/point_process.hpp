#pragma once

#include <string>
#include <vector>

#include "glx/evt.hpp"
#include "glx/stein_chen.hpp"

namespace glx {

// Level set: finite union of disjoint intervals (lo, hi], hi may be +inf.
struct LevelInterval {
    double lo = 0;
    double hi = std::numeric_limits<double>::infinity();
};

// Rectangle A in [0,1]^d (half-open per axis) times a union of level
// intervals R.
struct CellSpec {
    std::string id;
    std::vector<std::array<double, 2>> rect;  // per-axis [lo, hi)
    std::vector<LevelInterval> levels;

    bool contains_position(const std::array<double, kMaxDim>& t, int d) const;
    bool contains_level(double z) const;
    // Lebesgue measure of rect ∩ [delta, 1-delta]^d
    double truncated_measure(double delta, int d) const;
};

// The rescaled configuration (alpha/n, (phi_alpha - b_N)/a_N).
struct PointMeasure {
    int d = 0;
    std::vector<std::array<double, kMaxDim>> position;
    std::vector<double> level;
};
PointMeasure exceedance_points(const Eigen::VectorXd& field, const BoxDomain& domain,
                               const ScalingConstants& scaling, MaximaMode mode);

struct CellIntensity {
    double expected = 0;
    double void_prob = 1;
};
// expected count |A ∩ [delta,1-delta]^d| * sum_i (e^{-x_i} - e^{-y_i}) of the
// limit Poisson measure, and its void probability.
CellIntensity poisson_intensity(const CellSpec& cell, double delta, int d);

struct KallenbergCellRow {
    std::string id;
    double empirical_mean = 0;
    double empirical_var = 0;
    double intensity = 0;
    double var_mean_ratio = 0;
    double void_freq = 0;
    double void_limit = 0;
    double mean_se = 0;
    double lambda_exact = 0;  // finite-n sum of p_alpha over the cell
    std::int64_t sites_in_cell = 0;
};

struct KallenbergReport {
    std::vector<KallenbergCellRow> cells;
    double joint_void_freq = 0;
    double joint_void_limit = 0;   // limit product formula
    double joint_void_exact = 0;   // exp(-sum lambda_j) at finite n
    double agg2_bound = 0;
    std::int64_t replicates = 0;
    double u_reference = 0;
};

// Empirical check of the two Kallenberg conditions over the bulk point
// process, with the AGG2 companion bound computed from the interval
// indicator family (cells as partition).
KallenbergReport kallenberg_check(const ModelSpec& model, const BoxDomain& domain,
                                  const GaussianSampler& sampler,
                                  const std::shared_ptr<const GreenMatrix>& cov,
                                  const std::vector<CellSpec>& cells, double g0, double s_n,
                                  int replicates, std::uint64_t seed, int workers = 1,
                                  const QuadratureConfig& cfg = {});

}  // namespace glx
