#include "glx/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace glx {

namespace {

// QUADPACK qk15 nodes and weights on [-1, 1] (positive half; node 7 is 0).
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct PanelResult {
    double kronrod;
    double err;
};

PanelResult gk15_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double kron = kWgk[7] * fv[7];
    double gauss = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kron += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    kron *= h;
    gauss *= h;
    // QUADPACK-style error heuristic
    double resabs = 0, resasc = 0;
    const double mean = kron / (b - a);
    for (int i = 0; i < 7; ++i) {
        resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        resasc += kWgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
    }
    resabs += kWgk[7] * std::abs(fv[7]);
    resasc += kWgk[7] * std::abs(fv[7] - mean);
    resabs *= h;
    resasc *= h;
    double err = std::abs(kron - gauss);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return {kron, err};
}

double integrate_recursive(const std::function<double(double)>& f, double a, double b,
                           double tol_abs, int depth) {
    const PanelResult r = gk15_panel(f, a, b);
    if (r.err <= tol_abs || depth >= 52 || !(b - a > 1e-15 * (std::abs(a) + std::abs(b) + 1)))
        return r.kronrod;
    const double c = 0.5 * (a + b);
    return integrate_recursive(f, a, c, 0.5 * tol_abs, depth + 1) +
           integrate_recursive(f, c, b, 0.5 * tol_abs, depth + 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_floor) {
    if (!(b > a)) return 0.0;
    const PanelResult rough = gk15_panel(f, a, b);
    const double scale = std::max(std::abs(rough.kronrod), 1e-300);
    const double tol = std::max(abs_floor, rel_tol * scale);
    if (rough.err <= tol) return rough.kronrod;
    const double c = 0.5 * (a + b);
    return integrate_recursive(f, a, c, 0.5 * tol, 1) + integrate_recursive(f, c, b, 0.5 * tol, 1);
}

double integrate_semi_infinite_algebraic(const std::function<double(double)>& f, double T,
                                         double rel_tol) {
    if (!(T > 0)) throw std::invalid_argument("integrate_semi_infinite_algebraic: T > 0");
    const double head = integrate_adaptive(f, 0.0, T, rel_tol);
    // t = 1/u^2; GK nodes are interior so u = 0 is never evaluated
    const auto tail_integrand = [&f](double u) { return f(1.0 / (u * u)) * 2.0 / (u * u * u); };
    const double tail =
        integrate_adaptive(tail_integrand, 0.0, 1.0 / std::sqrt(T), rel_tol,
                           rel_tol * std::max(std::abs(head), 1e-300));
    return head + tail;
}

double bivariate_normal_tail_quadrature(double var1, double var2, double cov, double u1,
                                        double u2, double rel_tol, double abs_floor) {
    const double det = var1 * var2 - cov * cov;
    if (!(det > 0) || !(var1 > 0) || !(var2 > 0))
        throw std::invalid_argument("bivariate_normal_tail_quadrature: covariance not SPD");
    const double s1 = std::sqrt(var1), s2 = std::sqrt(var2);
    const double norm = 1.0 / (2.0 * M_PI * std::sqrt(det));
    const auto pdf = [&](double x, double y) {
        const double q = (var2 * x * x - 2.0 * cov * x * y + var1 * y * y) / det;
        return q > 1450.0 ? 0.0 : norm * std::exp(-0.5 * q);
    };
    // rational map of [u,inf) onto [0,1); adaptive in the mapped coordinates
    const auto outer = [&](double t) {
        const double x = u1 + s1 * t / (1.0 - t);
        const double jx = s1 / ((1.0 - t) * (1.0 - t));
        const auto inner = [&](double v) {
            const double y = u2 + s2 * v / (1.0 - v);
            const double jy = s2 / ((1.0 - v) * (1.0 - v));
            return pdf(x, y) * jy;
        };
        return jx * integrate_adaptive(inner, 0.0, 1.0, 0.2 * rel_tol, 0.05 * abs_floor);
    };
    return integrate_adaptive(outer, 0.0, 1.0, rel_tol, abs_floor);
}

}  // namespace glx
