#include "glx/stein_chen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glx/evt.hpp"
#include "glx/parallel.hpp"
#include "glx/quadrature.hpp"

namespace glx {

ExceedProb exceed_prob(double variance, double u) {
    if (!(variance > 0)) throw std::domain_error("exceed_prob: variance must be positive");
    const double t = u / std::sqrt(variance);
    ExceedProb e;
    e.p = norm_tail(t);
    e.bracket = mills_bracket(t);
    return e;
}

BivariateTail bivariate_exceed_prob(double var1, double var2, double cov, double u,
                                    const QuadratureConfig& cfg) {
    BivariateTail out;
    const double det = var1 * var2 - cov * cov;
    const double s1 = std::sqrt(var1), s2 = std::sqrt(var2);
    if (det <= 1e-12 * var1 * var2) {
        // comonotone branch: both exceed iff the tighter threshold does
        out.degenerate = true;
        out.p = norm_tail(std::max(u / s1, u / s2));
        out.savage = std::numeric_limits<double>::infinity();
        return out;
    }
    out.p = bivariate_normal_tail_quadrature(var1, var2, cov, u, u, cfg.rel_tol_2d, cfg.abs_floor_2d);
    // Savage bound with Delta_i = u (1^T Sigma^{-1})_i
    const double r1 = (var2 - cov) / det;  // (Sigma^{-1} 1)_1
    const double r2 = (var1 - cov) / det;
    const double d1 = u * r1, d2 = u * r2;
    if (d1 > 0 && d2 > 0) {
        const double quad = u * u * (r1 + r2);
        out.savage = std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det) * d1 * d2);
        out.savage_valid = true;
    } else {
        out.savage = std::numeric_limits<double>::infinity();
    }
    return out;
}

double bivariate_tail2(double var1, double var2, double cov, double u1, double u2,
                       const QuadratureConfig& cfg) {
    if (std::isinf(u1) || std::isinf(u2)) return 0.0;
    const double det = var1 * var2 - cov * cov;
    if (det <= 1e-12 * var1 * var2) {
        const double t = std::copysign(1.0, cov);
        if (t > 0) return norm_tail(std::max(u1 / std::sqrt(var1), u2 / std::sqrt(var2)));
        // antithetic degenerate: X = -c Y
        const double a = u1 / std::sqrt(var1), b = u2 / std::sqrt(var2);
        return std::max(0.0, norm_tail(a) - norm_cdf(-b));
    }
    return bivariate_normal_tail_quadrature(var1, var2, cov, u1, u2, cfg.rel_tol_2d, cfg.abs_floor_2d);
}

ResidualVarianceCache::ResidualVarianceCache(ModelSpec model, BoxDomain domain, double s_n,
                                             VarianceMode mode)
    : model_(model), domain_(domain), s_n_(s_n), mode_(mode) {}

std::pair<double, double> ResidualVarianceCache::var_mu_psi(const Site& alpha,
                                                            double variance) const {
    std::vector<Site> ball;
    if (mode_ == VarianceMode::FiniteVolume) {
        ball = ball_sites(alpha, s_n_, domain_);
    } else {
        ball = ball_sites_free(alpha, s_n_, domain_.d);
    }
    // shape key: offsets relative to alpha (deterministic scan order)
    std::vector<std::int32_t> key;
    key.reserve(ball.size() * static_cast<std::size_t>(domain_.d));
    for (const auto& b : ball)
        for (int i = 0; i < domain_.d; ++i) key.push_back(b[i] - alpha[i]);
    auto it = cache_.find(key);
    double var_psi;
    if (it != cache_.end()) {
        var_psi = it->second;
    } else {
        Eigen::Index pos = -1;
        for (std::size_t i = 0; i < ball.size(); ++i)
            if (ball[i] == alpha) pos = static_cast<Eigen::Index>(i);
        var_psi = residual_variance_from_precision(dense_precision(model_, ball), pos);
        cache_.emplace(std::move(key), var_psi);
    }
    return {std::max(0.0, variance - var_psi), var_psi};
}

double BernoulliFamily::lambda() const {
    double acc = 0;
    for (double v : p) acc += v;
    return acc;
}

double BernoulliFamily::pair_cov(std::size_t i, std::size_t j) const {
    const Site a = domain.site_at(sites[i]);
    const Site b = domain.site_at(sites[j]);
    if (mode == VarianceMode::FiniteVolume) {
        return cov->cov()(static_cast<Eigen::Index>(sites[i]), static_cast<Eigen::Index>(sites[j]));
    }
    return (*infinite)(a - b);
}

BernoulliFamily build_family(const ModelSpec& model, const BoxDomain& domain, double z, double s_n,
                             std::shared_ptr<const GreenMatrix> cov,
                             std::shared_ptr<const InfiniteGreenEvaluator> infinite,
                             VarianceMode mode) {
    if (mode == VarianceMode::FiniteVolume && !cov)
        throw std::invalid_argument("build_family: finite mode needs the Green matrix");
    if (mode == VarianceMode::InfiniteVolume && !infinite)
        throw std::invalid_argument("build_family: infinite mode needs the stationary evaluator");

    BernoulliFamily f;
    f.model = model;
    f.domain = domain;
    f.z = z;
    f.s_n = s_n;
    f.mode = mode;
    f.cov = std::move(cov);
    f.infinite = std::move(infinite);
    f.g0 = f.infinite ? f.infinite->variance()
                      : 0.0;  // finite-only families fall back to the matrix diagonal scale

    f.sites = bulk_indices(domain);
    if (f.sites.empty()) throw std::invalid_argument("build_family: empty bulk");
    f.m_n = static_cast<std::int64_t>(f.sites.size());

    double g0_for_u = f.g0;
    if (!(g0_for_u > 0)) {
        // without an infinite evaluator, center/scale with the max finite variance
        g0_for_u = 0;
        for (auto idx : f.sites)
            g0_for_u = std::max(g0_for_u, f.cov->cov()(static_cast<Eigen::Index>(idx),
                                                       static_cast<Eigen::Index>(idx)));
        f.g0 = g0_for_u;
    }
    const ScalingConstants sc = scaling_constants(g0_for_u, static_cast<double>(f.m_n));
    f.u = sc.u(z);

    // p_alpha and neighborhoods
    std::vector<std::int32_t> family_pos(static_cast<std::size_t>(domain.volume()), -1);
    for (std::size_t i = 0; i < f.sites.size(); ++i)
        family_pos[static_cast<std::size_t>(f.sites[i])] = static_cast<std::int32_t>(i);
    f.p.resize(f.sites.size());
    f.variance.resize(f.sites.size());
    f.nbr.resize(f.sites.size());
    for (std::size_t i = 0; i < f.sites.size(); ++i) {
        const Site alpha = domain.site_at(f.sites[i]);
        const double var = f.mode == VarianceMode::FiniteVolume
                               ? f.cov->cov()(static_cast<Eigen::Index>(f.sites[i]),
                                              static_cast<Eigen::Index>(f.sites[i]))
                               : f.g0;
        f.variance[i] = var;
        f.p[i] = exceed_prob(var, f.u).p;
        if (!(f.p[i] > 0.0 && f.p[i] < 1.0)) f.p[i] = std::clamp(f.p[i], 1e-300, 1.0 - 1e-16);
        for (const auto& b : ball_sites(alpha, f.s_n, domain)) {
            const std::int32_t pos = family_pos[static_cast<std::size_t>(domain.index_of(b))];
            if (pos >= 0) f.nbr[i].push_back(pos);
        }
    }
    return f;
}

namespace {

double b3_integral(double p, double u, double var_mu, double var_psi, int gh_order) {
    if (var_mu <= 1e-300) return 0.0;
    const double s_mu = std::sqrt(var_mu), s_psi = std::sqrt(var_psi);
    const GaussHermite& gh = GaussHermite::get(gh_order);
    const double c = 1.0 / std::sqrt(M_PI);
    double acc = 0;
    for (std::size_t k = 0; k < gh.x.size(); ++k) {
        const double mu = std::sqrt(2.0) * s_mu * gh.x[k];
        acc += gh.w[k] * std::abs(norm_tail((u - mu) / s_psi) - p);
    }
    return c * acc;
}

}  // namespace

SteinChenReport compute_bounds(const BernoulliFamily& family, const QuadratureConfig& cfg,
                               int workers) {
    SteinChenReport rep;
    rep.z = family.z;
    rep.u = family.u;
    rep.s_n = family.s_n;
    rep.g0 = family.g0;
    rep.mode = family.mode;
    rep.family_size = static_cast<std::int64_t>(family.sites.size());
    rep.lambda = family.lambda();

    const auto n = family.sites.size();
    rep.b1_per.assign(n, 0.0);
    rep.b2_per.assign(n, 0.0);
    rep.b3_per.assign(n, 0.0);
    rep.var_mu_per.assign(n, 0.0);
    rep.var_psi_per.assign(n, 0.0);

    ResidualVarianceCache rvc(family.model, family.domain, family.s_n, family.mode);

    parallel_for_chunks(static_cast<std::int64_t>(n), 32, workers,
                        [&](std::int64_t b, std::int64_t e, std::int64_t) {
        for (std::int64_t ii = b; ii < e; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            double b1 = 0, b2 = 0;
            for (const auto j32 : family.nbr[i]) {
                const auto j = static_cast<std::size_t>(j32);
                b1 += family.p[i] * family.p[j];
                if (j != i) {
                    const double cij = family.pair_cov(i, j);
                    b2 += bivariate_exceed_prob(family.variance[i], family.variance[j], cij,
                                                family.u, cfg)
                              .p;
                }
            }
            const Site alpha = family.domain.site_at(family.sites[i]);
            const auto [var_mu, var_psi] = rvc.var_mu_psi(alpha, family.variance[i]);
            rep.b1_per[i] = b1;
            rep.b2_per[i] = b2;
            rep.b3_per[i] = b3_integral(family.p[i], family.u, var_mu, var_psi,
                                        cfg.gauss_hermite_order);
            rep.var_mu_per[i] = var_mu;
            rep.var_psi_per[i] = var_psi;
        }
    });

    // fixed-order accumulation
    for (std::size_t i = 0; i < n; ++i) {
        rep.b1 += rep.b1_per[i];
        rep.b2 += rep.b2_per[i];
        rep.b3 += rep.b3_per[i];
    }
    const double bsum = rep.b1 + rep.b2 + rep.b3;
    rep.tv_bound = 2.0 * bsum;
    rep.void_gap_bound = poisson_gap_bound(rep.lambda, bsum);
    return rep;
}

double poisson_gap_bound(double lambda, double b_sum) {
    if (!(lambda > 0)) throw std::domain_error("poisson_gap_bound: lambda must be positive");
    return std::min(1.0, 1.0 / lambda) * b_sum;
}

PartitionReport multivariate_tv_bound(const BernoulliFamily& family, const SteinChenReport& report,
                                      const std::vector<std::vector<std::int32_t>>& cells) {
    PartitionReport out;
    out.b1 = report.b1;
    out.b2 = report.b2;
    out.b3 = report.b3;
    std::vector<bool> seen(family.sites.size(), false);
    for (const auto& cell : cells) {
        if (cell.empty()) throw std::invalid_argument("multivariate_tv_bound: empty partition cell");
        double lam = 0;
        for (auto pos : cell) {
            if (pos < 0 || static_cast<std::size_t>(pos) >= family.sites.size() ||
                seen[static_cast<std::size_t>(pos)])
                throw std::invalid_argument("multivariate_tv_bound: cells must partition the index set");
            seen[static_cast<std::size_t>(pos)] = true;
            lam += family.p[static_cast<std::size_t>(pos)];
        }
        out.lambda_j.push_back(lam);
    }
    const double min_lambda = *std::min_element(out.lambda_j.begin(), out.lambda_j.end());
    out.bound = 2.0 * std::min(1.0, 1.4 / std::sqrt(min_lambda)) *
                (2.0 * out.b1 + 2.0 * out.b2 + out.b3);
    return out;
}

}  // namespace glx
