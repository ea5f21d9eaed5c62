#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "glx/green.hpp"
#include "glx/lattice.hpp"
#include "glx/model.hpp"

namespace glx {

struct FieldSample {
    std::int64_t replicate = 0;
    std::uint64_t seed = 0;
    Eigen::VectorXd values;
};

// Exact Gaussian sampling from a covariance factor (x = L z) or a precision
// factor (solve L^T x = z), reproducible for a fixed (seed, replicate).
class GaussianSampler {
  public:
    static GaussianSampler from_covariance(const Eigen::MatrixXd& cov);
    static GaussianSampler from_dense_precision(const Eigen::MatrixXd& prec);
    static GaussianSampler from_sparse_precision(const Eigen::SparseMatrix<double>& prec);
    // Picks the factor-then-solve precision path (sparse where the model has
    // one) so membrane boxes never need a dense inverse.
    static GaussianSampler for_model(const ModelSpec& model, const BoxDomain& domain);

    Eigen::Index size() const { return size_; }
    void sample_into(std::uint64_t seed, std::int64_t replicate, Eigen::VectorXd& out) const;
    std::vector<FieldSample> sample(int count, std::uint64_t seed, int workers = 1) const;

  private:
    enum class Mode { CovFactor, DensePrecision, SparsePrecision };
    Mode mode_ = Mode::CovFactor;
    Eigen::Index size_ = 0;
    Eigen::MatrixXd dense_factor_;  // lower factor of cov or of dense precision
    std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> sparse_llt_;
};

// Conditional decomposition phi_alpha = mu_alpha + psi_alpha given F_K.
struct ConditionalDecomposition {
    Eigen::VectorXd weights;  // T(alpha, .) over K, in K order
    double variance = 0;      // Var[phi_alpha]
    double var_mu = 0;
    double var_psi = 0;
};

// T(alpha, gamma) = sum_xi G(alpha, xi) G_K^{-1}(xi, gamma); the delta row
// when alpha is in K. Throws if G_K is singular.
Eigen::VectorXd conditional_weights(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& K,
                                    Eigen::Index alpha);

// var_mu by the T route, cross-checked against the Schur-complement route
// (triangular-solve quadratic form); mismatch beyond 1e-8 * variance throws.
ConditionalDecomposition conditional_variances(const Eigen::MatrixXd& cov,
                                               const std::vector<Eigen::Index>& K,
                                               Eigen::Index alpha);

// Var[phi_alpha | field outside the ball] read from the model's precision
// matrix restricted to the ball: the (alpha, alpha) entry of its inverse.
double residual_variance_from_precision(const Eigen::MatrixXd& prec_ball, Eigen::Index alpha_pos);

// Infinite-volume residual variance by the Markov property: the killed
// Green's function of the free ball around alpha, evaluated at alpha.
double residual_variance_infinite(const ModelSpec& model, double radius);

}  // namespace glx
