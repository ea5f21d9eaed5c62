#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "glx/gaussian.hpp"
#include "glx/green.hpp"
#include "glx/lattice.hpp"
#include "glx/model.hpp"
#include "glx/special.hpp"

namespace glx {

// Exact Gaussian exceedance probability with the Mills bracket.
struct ExceedProb {
    double p = 0;
    MillsBracket bracket;
};
ExceedProb exceed_prob(double variance, double u);

struct QuadratureConfig {
    int gauss_hermite_order = 64;
    double rel_tol_2d = 1e-9;
    double abs_floor_2d = 1e-10;
};

// P(X > u, Y > u) by adaptive 2-d quadrature plus the Savage closed-form
// upper bound (infinite when some Delta_i <= 0). Correlations near 1 take
// the comonotone branch.
struct BivariateTail {
    double p = 0;
    double savage = 0;
    bool savage_valid = false;
    bool degenerate = false;
};
BivariateTail bivariate_exceed_prob(double var1, double var2, double cov, double u,
                                    const QuadratureConfig& cfg = {});
// Two-threshold joint tail P(X > u1, Y > u2); +infinity thresholds give 0.
double bivariate_tail2(double var1, double var2, double cov, double u1, double u2,
                       const QuadratureConfig& cfg = {});

enum class VarianceMode { FiniteVolume, InfiniteVolume };

// Conditional variances Var[mu_alpha], Var[psi_alpha] for the H2 conditioning
// K = V_N \ B(alpha, s_N), read from the model precision restricted to the
// clipped ball. Two-level cache: the offset shape (translation invariance of
// the stencils) and, for balls swallowing the whole box, a shared factor of
// the absolute site set. Safe for concurrent use.
class ResidualVarianceCache {
  public:
    ResidualVarianceCache(ModelSpec model, BoxDomain domain, double s_n, VarianceMode mode);
    // (var_mu, var_psi) given the field's variance at alpha
    std::pair<double, double> var_mu_psi(const Site& alpha, double variance) const;

  private:
    ModelSpec model_;
    BoxDomain domain_;
    double s_n_;
    VarianceMode mode_;
    mutable std::mutex mutex_;
    mutable std::map<std::vector<std::int32_t>, double> by_shape_;
    mutable std::map<std::vector<std::int64_t>, std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>>>
        by_sites_;
};

// The exceedance Bernoulli family over the bulk at level u_{m_N}(z).
struct BernoulliFamily {
    ModelSpec model;
    BoxDomain domain;
    double z = 0;
    double u = 0;
    double s_n = 0;
    double g0 = 0;
    VarianceMode mode = VarianceMode::FiniteVolume;
    std::int64_t m_n = 0;  // exact |bulk|

    std::vector<std::int64_t> sites;             // domain indices of A (bulk order)
    std::vector<double> p;                       // p_alpha
    std::vector<double> variance;                // per-alpha variance used for p
    std::vector<std::vector<std::int32_t>> nbr;  // positions into `sites` of B_alpha ∩ A

    std::shared_ptr<const GreenMatrix> cov;                 // finite covariances
    std::shared_ptr<const InfiniteGreenEvaluator> infinite; // stationary covariances

    double lambda() const;
    double pair_cov(std::size_t i, std::size_t j) const;
};

BernoulliFamily build_family(const ModelSpec& model, const BoxDomain& domain, double z, double s_n,
                             std::shared_ptr<const GreenMatrix> cov,
                             std::shared_ptr<const InfiniteGreenEvaluator> infinite,
                             VarianceMode mode);

struct SteinChenReport {
    double z = 0, u = 0, s_n = 0;
    double lambda = 0, b1 = 0, b2 = 0, b3 = 0;
    double tv_bound = 0, void_gap_bound = 0;
    std::int64_t family_size = 0;
    double g0 = 0;
    VarianceMode mode = VarianceMode::FiniteVolume;
    // per-alpha breakdown, in family order
    std::vector<double> b1_per, b2_per, b3_per, var_mu_per, var_psi_per;
};

SteinChenReport compute_bounds(const BernoulliFamily& family, const QuadratureConfig& cfg = {},
                               int workers = 1);

// min(1, 1/lambda) (b1+b2+b3)
double poisson_gap_bound(double lambda, double b_sum);

// AGG2 joint bound over a partition of the family's index set.
struct PartitionReport {
    std::vector<double> lambda_j;
    double b1 = 0, b2 = 0, b3 = 0;
    double bound = 0;
};
PartitionReport multivariate_tv_bound(const BernoulliFamily& family, const SteinChenReport& report,
                                      const std::vector<std::vector<std::int32_t>>& cells);

}  // namespace glx
