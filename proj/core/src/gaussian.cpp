#include "glx/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include "glx/parallel.hpp"
#include "glx/rng.hpp"

namespace glx {

namespace {
std::uint64_t splitmix_fin(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}
}  // namespace

ReplicateRng::ReplicateRng(std::uint64_t seed, std::uint64_t stream) {
    state_ = splitmix_fin(splitmix_fin(seed + 0x9E3779B97F4A7C15ull) ^
                          (0xD1B54A32D192ED03ull * (stream + 1)));
}

std::uint64_t ReplicateRng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix_fin(state_);
}

double ReplicateRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double ReplicateRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

GaussianSampler GaussianSampler::from_covariance(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("GaussianSampler: covariance is not positive definite");
    GaussianSampler s;
    s.mode_ = Mode::CovFactor;
    s.size_ = cov.rows();
    s.dense_factor_ = llt.matrixL();
    return s;
}

GaussianSampler GaussianSampler::from_dense_precision(const Eigen::MatrixXd& prec) {
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("GaussianSampler: precision is not positive definite");
    GaussianSampler s;
    s.mode_ = Mode::DensePrecision;
    s.size_ = prec.rows();
    s.dense_factor_ = llt.matrixL();
    return s;
}

GaussianSampler GaussianSampler::from_sparse_precision(const Eigen::SparseMatrix<double>& prec) {
    auto llt = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    llt->compute(prec);
    if (llt->info() != Eigen::Success)
        throw std::runtime_error("GaussianSampler: sparse precision factorization failed");
    GaussianSampler s;
    s.mode_ = Mode::SparsePrecision;
    s.size_ = prec.rows();
    s.sparse_llt_ = std::move(llt);
    return s;
}

GaussianSampler GaussianSampler::for_model(const ModelSpec& model, const BoxDomain& domain) {
    const auto sites = enumerate_box(domain.d, domain.n);
    if (model.kind == ModelKind::FractionalGff)
        return from_dense_precision(dense_precision(model, sites));
    return from_sparse_precision(sparse_precision(model, sites));
}

void GaussianSampler::sample_into(std::uint64_t seed, std::int64_t replicate,
                                  Eigen::VectorXd& out) const {
    ReplicateRng rng(seed, static_cast<std::uint64_t>(replicate));
    Eigen::VectorXd z(size_);
    for (Eigen::Index i = 0; i < size_; ++i) z(i) = rng.normal();
    switch (mode_) {
        case Mode::CovFactor:
            out.noalias() = dense_factor_.triangularView<Eigen::Lower>() * z;
            break;
        case Mode::DensePrecision:
            out = dense_factor_.triangularView<Eigen::Lower>().transpose().solve(z);
            break;
        case Mode::SparsePrecision: {
            // P A P^T = L L^T; x = P^T L^{-T} z has covariance A^{-1}
            Eigen::VectorXd w = sparse_llt_->matrixU().solve(z);
            out = sparse_llt_->permutationPinv() * w;
            break;
        }
    }
}

std::vector<FieldSample> GaussianSampler::sample(int count, std::uint64_t seed, int workers) const {
    std::vector<FieldSample> out(static_cast<std::size_t>(count));
    parallel_for_chunks(count, 16, workers, [&](std::int64_t b, std::int64_t e, std::int64_t) {
        for (std::int64_t i = b; i < e; ++i) {
            out[static_cast<std::size_t>(i)].replicate = i;
            out[static_cast<std::size_t>(i)].seed = seed;
            sample_into(seed, i, out[static_cast<std::size_t>(i)].values);
        }
    });
    return out;
}

Eigen::VectorXd conditional_weights(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& K,
                                    Eigen::Index alpha) {
    const auto k = static_cast<Eigen::Index>(K.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < k; ++j)
        if (K[static_cast<std::size_t>(j)] == alpha) {
            w(j) = 1.0;
            return w;
        }
    if (k == 0) return w;
    Eigen::MatrixXd gk(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        rhs(i) = cov(K[static_cast<std::size_t>(i)], alpha);
        for (Eigen::Index j = 0; j < k; ++j)
            gk(i, j) = cov(K[static_cast<std::size_t>(i)], K[static_cast<std::size_t>(j)]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gk);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("conditional_weights: G_K is singular");
    w = llt.solve(rhs);
    return w;
}

ConditionalDecomposition conditional_variances(const Eigen::MatrixXd& cov,
                                               const std::vector<Eigen::Index>& K,
                                               Eigen::Index alpha) {
    ConditionalDecomposition dec;
    dec.variance = cov(alpha, alpha);
    dec.weights = conditional_weights(cov, K, alpha);
    const auto k = static_cast<Eigen::Index>(K.size());
    double var_mu_t = 0;
    for (Eigen::Index j = 0; j < k; ++j)
        var_mu_t += dec.weights(j) * cov(alpha, K[static_cast<std::size_t>(j)]);

    // Schur route through the triangular factor
    double var_mu_schur = 0;
    bool alpha_in_k = false;
    for (auto idx : K) alpha_in_k = alpha_in_k || idx == alpha;
    if (alpha_in_k) {
        var_mu_schur = dec.variance;
        var_mu_t = dec.variance;
    } else if (k > 0) {
        Eigen::MatrixXd gk(k, k);
        Eigen::VectorXd rhs(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            rhs(i) = cov(K[static_cast<std::size_t>(i)], alpha);
            for (Eigen::Index j = 0; j < k; ++j)
                gk(i, j) = cov(K[static_cast<std::size_t>(i)], K[static_cast<std::size_t>(j)]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(gk);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("conditional_variances: G_K is singular");
        const Eigen::VectorXd y = llt.matrixL().solve(rhs);
        var_mu_schur = y.squaredNorm();
    }
    if (std::abs(var_mu_t - var_mu_schur) > 1e-8 * std::max(1.0, dec.variance))
        throw std::runtime_error("conditional_variances: T-route and Schur route disagree");
    dec.var_mu = var_mu_t;
    dec.var_psi = dec.variance - dec.var_mu;
    return dec;
}

double residual_variance_from_precision(const Eigen::MatrixXd& prec_ball, Eigen::Index alpha_pos) {
    Eigen::LLT<Eigen::MatrixXd> llt(prec_ball);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("residual_variance_from_precision: not positive definite");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(prec_ball.rows());
    e(alpha_pos) = 1.0;
    return llt.solve(e)(alpha_pos);
}

double residual_variance_infinite(const ModelSpec& model, double radius) {
    const Site center = Site::origin(model.d);
    const auto ball = ball_sites_free(center, radius, model.d);
    Eigen::Index pos = -1;
    for (std::size_t i = 0; i < ball.size(); ++i)
        if (ball[i] == center) pos = static_cast<Eigen::Index>(i);
    if (model.kind != ModelKind::FractionalGff && ball.size() > 1500) {
        const auto prec = sparse_precision(model, ball);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(prec);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("residual_variance_infinite: sparse factorization failed");
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ball.size()));
        e(pos) = 1.0;
        return ldlt.solve(e)(pos);
    }
    return residual_variance_from_precision(dense_precision(model, ball), pos);
}

}  // namespace glx
