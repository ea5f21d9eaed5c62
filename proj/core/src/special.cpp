#include "glx/special.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace glx {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double norm_tail_inverse(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_tail_inverse: p must be in (0,1)");
    // Acklam-style rational initial guess for the lower quantile of 1-p,
    // then Newton on the tail function.
    const double q = 1.0 - p;  // cdf value
    double x;
    {
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
        static const double e[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425;
        if (q < plow) {
            const double r = std::sqrt(-2 * std::log(q));
            x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
                ((((e[0] * r + e[1]) * r + e[2]) * r + e[3]) * r + 1);
        } else if (q <= 1 - plow) {
            const double r = q - 0.5, t = r * r;
            x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * r /
                (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1);
        } else {
            const double r = std::sqrt(-2 * std::log(1 - q));
            x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
                ((((e[0] * r + e[1]) * r + e[2]) * r + e[3]) * r + 1);
        }
    }
    for (int it = 0; it < 3; ++it) {
        const double f = norm_tail(x) - p;
        const double df = -norm_pdf(x);
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-14 * (1 + std::abs(x))) break;
    }
    return x;
}

MillsBracket mills_bracket(double t) {
    MillsBracket m;
    m.exact = norm_tail(t);
    if (t > 0) {
        const double ratio = norm_pdf(t) / t;
        m.upper = ratio;
        m.lower = (1.0 - 1.0 / (t * t)) * ratio;
        m.valid = true;
    }
    return m;
}

namespace {

// Hankel asymptotic series for e^{-x} I_n(x); returns false if it fails to
// reach relative 1e-15 within the term budget.
bool scaled_bessel_asymptotic(double x, int n, double& out) {
    const double mu = 4.0 * static_cast<double>(n) * n;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 14; ++k) {
        const double num = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        term *= -num / (8.0 * x * k);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) {
            out = sum / std::sqrt(2.0 * M_PI * x);
            return true;
        }
    }
    return false;
}

}  // namespace

void scaled_bessel_i(double x, int nmax, std::span<double> out) {
    if (nmax < 0 || out.size() < static_cast<std::size_t>(nmax + 1))
        throw std::invalid_argument("scaled_bessel_i: bad order/output span");
    if (x < 0) throw std::domain_error("scaled_bessel_i: x >= 0 required");
    if (x == 0.0) {
        out[0] = 1.0;
        for (int n = 1; n <= nmax; ++n) out[static_cast<std::size_t>(n)] = 0.0;
        return;
    }
    if (x >= std::max(1.0e3, 30.0 * (nmax + 1.0) * (nmax + 1.0))) {
        bool ok = true;
        for (int n = 0; n <= nmax && ok; ++n)
            ok = scaled_bessel_asymptotic(x, n, out[static_cast<std::size_t>(n)]);
        if (ok) return;
    }
    // starting order: walk ratio bound I_{k+1}/I_k <= x/(k + sqrt(k^2+x^2))
    // down to 1e-22 cumulative
    int M = std::max(nmax, static_cast<int>(x)) + 2;
    {
        double logdecay = 0.0;
        int k = M;
        while (logdecay > -55.0) {
            logdecay += std::log(x / (k + std::sqrt(static_cast<double>(k) * k + x * x)));
            ++k;
        }
        M = k;
    }
    std::vector<double> p(static_cast<std::size_t>(M) + 2, 0.0);
    p[static_cast<std::size_t>(M) + 1] = 0.0;
    p[static_cast<std::size_t>(M)] = 1e-30;
    double norm = 0.0;  // accumulates p0 + 2*sum_k p_k after the loop
    for (int k = M; k >= 1; --k) {
        p[static_cast<std::size_t>(k) - 1] =
            p[static_cast<std::size_t>(k) + 1] + (2.0 * k / x) * p[static_cast<std::size_t>(k)];
        if (p[static_cast<std::size_t>(k) - 1] > 1e260) {
            for (int j = k - 1; j <= M + 1; ++j) p[static_cast<std::size_t>(j)] *= 1e-260;
        }
    }
    norm = p[0];
    for (int k = 1; k <= M; ++k) norm += 2.0 * p[static_cast<std::size_t>(k)];
    for (int n = 0; n <= nmax; ++n) out[static_cast<std::size_t>(n)] = p[static_cast<std::size_t>(n)] / norm;
}

double scaled_bessel_i0(double x) {
    double v[1];
    scaled_bessel_i(x, 0, std::span<double>(v, 1));
    return v[0];
}

namespace {

std::pair<std::vector<double>, std::vector<double>> golub_welsch(int n,
                                                                 const std::vector<double>& offdiag,
                                                                 double weight_total) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        J(k, k + 1) = offdiag[static_cast<std::size_t>(k)];
        J(k + 1, k) = offdiag[static_cast<std::size_t>(k)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = weight_total * v0 * v0;
    }
    return {std::move(x), std::move(w)};
}

std::mutex g_rule_mutex;

}  // namespace

const GaussHermite& GaussHermite::get(int n) {
    static std::map<int, GaussHermite> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> off(static_cast<std::size_t>(n - 1));
    for (int k = 1; k < n; ++k) off[static_cast<std::size_t>(k - 1)] = std::sqrt(k / 2.0);
    auto [x, w] = golub_welsch(n, off, std::sqrt(M_PI));
    GaussHermite rule;
    rule.x = std::move(x);
    rule.w = std::move(w);
    return cache.emplace(n, std::move(rule)).first->second;
}

const GaussLegendre& GaussLegendre::get(int n) {
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> off(static_cast<std::size_t>(n - 1));
    for (int k = 1; k < n; ++k)
        off[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
    auto [x, w] = golub_welsch(n, off, 2.0);
    GaussLegendre rule;
    rule.x = std::move(x);
    rule.w = std::move(w);
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace glx
