#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "glx/lattice.hpp"
#include "glx/model.hpp"

namespace glx {

struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept;
};

// Dense finite-volume covariance over an ordered site set. For a BoxDomain
// the order is the row-major site_index; for explicit site lists it is the
// input order.
class GreenMatrix {
  public:
    GreenMatrix() = default;
    GreenMatrix(std::vector<Site> sites, Eigen::MatrixXd cov, std::string source);

    const std::vector<Site>& sites() const { return sites_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    Eigen::Index size() const { return cov_.rows(); }
    const std::string& source() const { return source_; }

    // position of a site in the ordering, or -1
    std::int64_t position_of(const Site& s) const;
    double operator()(Eigen::Index i, Eigen::Index j) const { return cov_(i, j); }

  private:
    std::vector<Site> sites_;
    std::unordered_map<Site, std::int64_t, SiteHash> pos_;
    Eigen::MatrixXd cov_;
    std::string source_;
};

// Model precision matrix restricted to the given sites. The DGFF uses
// I - P_V, the massive field I - (1-theta) P_V, the membrane the bilaplacian
// entries of Z^d restricted to the set (the BVP form, not (I-P_V)^2), and
// the fractional field (I - Q)_Lambda. The Laplacian is normalized as the
// walk generator Delta = P - I throughout.
Eigen::SparseMatrix<double> sparse_precision(const ModelSpec& model, const std::vector<Site>& sites);
Eigen::MatrixXd dense_precision(const ModelSpec& model, const std::vector<Site>& sites);

// g_N = (precision)^{-1}; throws if the Cholesky factorization fails.
GreenMatrix finite_green(const ModelSpec& model, const std::vector<Site>& sites);
GreenMatrix finite_green(const ModelSpec& model, const BoxDomain& domain);

// ((I - P_V)^2)^{-1} = Gamma_V * Gamma_V, the squared Dirichlet resolvent.
// This is the matrix counterpart of the weight-(m+1) path sum; for the
// membrane it differs from finite_green near the boundary.
Eigen::MatrixXd squared_resolvent_green(const ModelSpec& model, const std::vector<Site>& sites);

// Infinite-volume covariance by the one-dimensional Bessel-integral
// representation (DGFF d>=3, membrane d>=5, massive any d).
double walk_green_infinite(const ModelSpec& model, const Site& offset, double rel_tol = 1e-11);

// Isotropic stable density q_s(x) by radial Fourier inversion; supports
// d in {1,2,3} and s in [0.4, 2). x may be any point of R^d.
double stable_density(std::span<const double> x, int d, double s, double rho, double rel_tol = 1e-10);

// Transition matrix entry of the isotropic stable walk:
// Q(a,b) = integral over the unit cube of q_s(x + (a-b)).
double fractional_transition(const ModelSpec& model, const Site& a, const Site& b);

// Mass of q_s inside the centered cube [-L, L]^d via the radial route
// (d <= 2); independent of the per-cell cube quadrature, used for row-sum
// tail completion.
double stable_cube_mass(double L, int d, double s, double rho, double rel_tol = 1e-10);

// Q(offset) with a symmetry-reduced cache; shared by precision assembly and
// the large-box inversion.
class FractionalKernel {
  public:
    explicit FractionalKernel(ModelSpec model, int gauss_order = 16);
    double q_entry(const Site& offset) const;
    const ModelSpec& model() const { return model_; }

  private:
    ModelSpec model_;
    int gauss_order_;
    mutable std::map<std::array<std::int32_t, kMaxDim>, double> cache_;
    mutable std::shared_mutex mutex_;
};

// G_s(0, offset) approximated by inverting (I - Q) on the centered box of
// the given radius (conjugate gradients, matrix-free convolution). Refuses
// box_radius < 4 * |offset| since the truncation error contract cannot be
// met there.
double fractional_green_infinite(const ModelSpec& model, const Site& offset, int box_radius);

// Whole centered-box column G_s(0, .) for reuse across offsets.
struct FractionalGreenColumn {
    int box_radius = 0;
    std::vector<double> values;  // row-major over [-R, R]^d
    double at(const Site& offset) const;
    int d = 0;
};
FractionalGreenColumn fractional_green_column(const ModelSpec& model, int box_radius);

// Stationary infinite-volume evaluator with a symmetry-reduced cache.
class InfiniteGreenEvaluator {
  public:
    explicit InfiniteGreenEvaluator(ModelSpec model, double rel_tol = 1e-11,
                                    int fractional_box_radius = 32);

    double operator()(const Site& offset) const;
    double variance() const;  // g(0)
    const ModelSpec& model() const { return model_; }
    double rel_tol() const { return rel_tol_; }
    int fractional_box_radius() const { return fractional_box_radius_; }

  private:
    ModelSpec model_;
    double rel_tol_;
    int fractional_box_radius_;
    mutable std::map<std::array<std::int32_t, kMaxDim>, double> cache_;
    mutable std::shared_mutex mutex_;
    mutable std::shared_ptr<const FractionalGreenColumn> column_;
};

// kappa = 1 - sup_{alpha != 0} g(alpha)/g(0), scanned over a ball and
// certified beyond it by the model's decay law fitted on the outer shells.
struct KappaEstimate {
    double kappa = 0;
    Site argmax_offset;
    double max_ratio = 0;
    double search_radius = 0;
    bool tail_certified = false;
    double tail_ratio_bound = 0;  // certified sup of g/g(0) beyond the scan
    std::string note;
};
KappaEstimate kappa_estimate(const ModelSpec& model, double search_radius, double rel_tol = 1e-9);

// Truncated path sum sum_m w(m) P_a[S_m = b, m < exit] over the given domain
// with a certified spectral tail bound. Weight is 1 or (m+1).
enum class WalkWeight { Unit, LinearPlusOne };
struct WalkOracleResult {
    double value = 0;
    double tail_bound = 0;
    int steps = 0;
    double spectral_norm = 0;
};
WalkOracleResult killed_walk_green_oracle(const ModelSpec& model, const std::vector<Site>& domain,
                                          const Site& a, const Site& b, WalkWeight weight,
                                          double tol, int max_steps = 500000);

}  // namespace glx
