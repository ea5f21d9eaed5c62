#include <cmath>
#include <mutex>
#include <stdexcept>

#include "glx/green.hpp"
#include "glx/quadrature.hpp"
#include "glx/special.hpp"

namespace glx {

namespace {

void check_stable_params(int d, double s, double rho) {
    if (d < 1 || d > 3) throw std::out_of_range("stable density: quadrature supports d in {1,2,3}");
    if (!(s >= 0.4 && s < 2.0))
        throw std::out_of_range("stable density: index s must be in [0.4, 2) for the quadrature");
    if (!(rho > 0)) throw std::domain_error("stable density: rho > 0 required");
}

double surface_area(int d) {
    // |S^{d-1}|
    return 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0);
}

double stable_density_at_origin(int d, double s, double rho) {
    return std::pow(2.0 * M_PI, -d) * surface_area(d) * std::tgamma(d / s) /
           (s * std::pow(rho, static_cast<double>(d) / s));
}

// sum of half-period panels of an oscillatory radial integrand with
// exponentially decaying envelope exp(-rho t^s)
double oscillatory_panels(const std::function<double(double)>& f, double period, double t_max,
                          double rel_tol) {
    double acc = 0.0;
    double t = 0.0;
    std::size_t panels = 0;
    while (t < t_max) {
        const double hi = std::min(t + period, t_max);
        const double piece = integrate_adaptive(f, t, hi, 0.05 * rel_tol, 0.0);
        acc += piece;
        t = hi;
        ++panels;
        if (panels > 2000000) throw std::out_of_range("stable density: oscillatory panel budget exceeded");
        if (std::abs(piece) < 0.01 * rel_tol * std::abs(acc) && panels > 4) break;
    }
    return acc;
}

}  // namespace

double stable_density(std::span<const double> x, int d, double s, double rho, double rel_tol) {
    check_stable_params(d, s, rho);
    if (x.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("stable_density: point dimension mismatch");
    double r2 = 0;
    for (double xi : x) r2 += xi * xi;
    const double r0 = std::sqrt(r2);
    if (r0 < 1e-10) return stable_density_at_origin(d, s, rho);

    const double T = std::pow(46.0 / rho, 1.0 / s);
    const auto envelope = [&](double t) { return std::exp(-rho * std::pow(t, s)); };
    double value = 0;
    switch (d) {
        case 1: {
            const auto f = [&](double t) { return std::cos(t * r0) * envelope(t); };
            value = (r0 * T < M_PI) ? integrate_adaptive(f, 0.0, T, rel_tol)
                                    : oscillatory_panels(f, M_PI / r0, T, rel_tol);
            value /= M_PI;
            break;
        }
        case 2: {
            const auto f = [&](double t) { return t * j0(t * r0) * envelope(t); };
            value = (r0 * T < M_PI) ? integrate_adaptive(f, 0.0, T, rel_tol)
                                    : oscillatory_panels(f, M_PI / r0, T, rel_tol);
            value /= 2.0 * M_PI;
            break;
        }
        case 3: {
            const auto f = [&](double t) { return t * std::sin(t * r0) * envelope(t); };
            value = (r0 * T < M_PI) ? integrate_adaptive(f, 0.0, T, rel_tol)
                                    : oscillatory_panels(f, M_PI / r0, T, rel_tol);
            value /= 2.0 * M_PI * M_PI * r0;
            break;
        }
    }
    return value;
}

double stable_cube_mass(double L, int d, double s, double rho, double rel_tol) {
    check_stable_params(d, s, rho);
    if (!(L > 0)) throw std::domain_error("stable_cube_mass: L > 0");
    if (d == 1) {
        // Gil-Pelaez for a symmetric law: P(|X| <= L) = (2/pi) int sin(tL)/t e^{-rho t^s} dt
        const double T = std::pow(46.0 / rho, 1.0 / s);
        const auto f = [&](double t) {
            return (t < 1e-14 ? L : std::sin(t * L) / t) * std::exp(-rho * std::pow(t, s));
        };
        const double v = (L * T < M_PI) ? integrate_adaptive(f, 0.0, T, rel_tol)
                                        : oscillatory_panels(f, M_PI / L, T, rel_tol);
        return 2.0 / M_PI * v;
    }
    if (d == 2) {
        // radial density through the square: full circles up to L, then the
        // four corner arcs with angular fraction 1 - (4/pi) acos(L/r)
        const auto f_full = [&](double r) {
            const double xv[2] = {r, 0.0};
            return 2.0 * M_PI * r * stable_density(std::span<const double>(xv, 2), 2, s, rho, 1e-9);
        };
        const double inner = integrate_adaptive(f_full, 0.0, L, 1e-8);
        const auto f_corner = [&](double r) {
            const double xv[2] = {r, 0.0};
            const double frac = 1.0 - (4.0 / M_PI) * std::acos(std::min(1.0, L / r));
            return 2.0 * M_PI * r * frac * stable_density(std::span<const double>(xv, 2), 2, s, rho, 1e-9);
        };
        const double corner = integrate_adaptive(f_corner, L, std::sqrt(2.0) * L, 1e-8);
        return inner + corner;
    }
    throw std::out_of_range("stable_cube_mass: d <= 2 only");
}

FractionalKernel::FractionalKernel(ModelSpec model, int gauss_order)
    : model_(model), gauss_order_(gauss_order) {
    if (model_.kind != ModelKind::FractionalGff)
        throw std::invalid_argument("FractionalKernel: fractional model required");
    model_.validate_finite();
    if (model_.d > 3) throw std::out_of_range("FractionalKernel: d <= 3");
}

double FractionalKernel::q_entry(const Site& offset) const {
    const auto key = symmetry_key(offset);
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const int d = model_.d;
    const double s = model_.stable_index, rho = model_.stable_scale;
    const GaussLegendre& rule = GaussLegendre::get(gauss_order_);
    const bool cauchy = std::abs(s - 1.0) < 1e-14;  // closed-form fast path
    const double cd = std::tgamma((d + 1) / 2.0) / std::pow(M_PI, (d + 1) / 2.0);
    const auto density = [&](const double* x) {
        if (cauchy) {
            double r2 = 0;
            for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
            return cd * rho / std::pow(rho * rho + r2, (d + 1) / 2.0);
        }
        return stable_density(std::span<const double>(x, static_cast<std::size_t>(d)), d, s, rho, 1e-10);
    };
    // tensor Gauss over the unit cube shifted by the (canonical) offset
    double val = 0;
    const int m = gauss_order_;
    std::array<int, 3> idx{0, 0, 0};
    double pt[3];
    while (true) {
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            w *= 0.5 * rule.w[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            pt[i] = 0.5 * rule.x[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] +
                    key[static_cast<std::size_t>(i)];
        }
        val += w * density(pt);
        int i = d - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - 1) idx[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
    }
    std::unique_lock lock(mutex_);
    cache_.emplace(key, val);
    return val;
}

double fractional_transition(const ModelSpec& model, const Site& a, const Site& b) {
    FractionalKernel kernel(model);
    return kernel.q_entry(a - b);
}

double FractionalGreenColumn::at(const Site& offset) const {
    const int R = box_radius;
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) {
        const int c = offset[i] + R;
        if (c < 0 || c > 2 * R) throw std::out_of_range("FractionalGreenColumn: offset outside box");
        idx = idx * (2 * R + 1) + c;
    }
    return values[static_cast<std::size_t>(idx)];
}

FractionalGreenColumn fractional_green_column(const ModelSpec& model, int box_radius) {
    model.validate_infinite();
    const int d = model.d;
    if (d > 2)
        throw std::out_of_range("fractional_green_column: convolution solver supports d <= 2");
    const int R = box_radius;
    const int W = 2 * R + 1;
    const std::int64_t M = d == 1 ? W : static_cast<std::int64_t>(W) * W;

    FractionalKernel kernel(model);
    // kernel table over difference offsets [-2R, 2R]^d
    const int KW = 4 * R + 1;
    std::vector<double> qtab(static_cast<std::size_t>(d == 1 ? KW : KW * KW));
    {
        Site off = Site::origin(d);
        if (d == 1) {
            for (int i = -2 * R; i <= 2 * R; ++i) {
                off[0] = i;
                qtab[static_cast<std::size_t>(i + 2 * R)] = kernel.q_entry(off);
            }
        } else {
            for (int i = -2 * R; i <= 2 * R; ++i)
                for (int j = -2 * R; j <= 2 * R; ++j) {
                    off[0] = i;
                    off[1] = j;
                    qtab[static_cast<std::size_t>((i + 2 * R) * KW + (j + 2 * R))] = kernel.q_entry(off);
                }
        }
    }

    const auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        if (d == 1) {
            for (int p = 0; p < W; ++p) {
                double acc = 0;
                const double* qrow = &qtab[static_cast<std::size_t>(p + 2 * R)];
                for (int q = 0; q < W; ++q) acc += qrow[-q] * x[static_cast<std::size_t>(q)];
                y[static_cast<std::size_t>(p)] = x[static_cast<std::size_t>(p)] - acc;
            }
            return;
        }
        for (int i = 0; i < W; ++i) {
            for (int j = 0; j < W; ++j) {
                double acc = 0;
                for (int k = 0; k < W; ++k) {
                    const double* qrow = &qtab[static_cast<std::size_t>((i - k + 2 * R) * KW + (j + 2 * R))];
                    const double* xrow = &x[static_cast<std::size_t>(k) * W];
                    for (int l = 0; l < W; ++l) acc += qrow[-l] * xrow[l];
                }
                y[static_cast<std::size_t>(i) * W + j] = x[static_cast<std::size_t>(i) * W + j] - acc;
            }
        }
    };

    // CG on (I - Q) x = e_center
    std::vector<double> x(static_cast<std::size_t>(M), 0.0), r(static_cast<std::size_t>(M), 0.0),
        p(static_cast<std::size_t>(M), 0.0), Ap(static_cast<std::size_t>(M), 0.0);
    const std::size_t center = static_cast<std::size_t>(d == 1 ? R : static_cast<std::int64_t>(R) * W + R);
    x[center] = 1.0;
    apply(x, Ap);
    double rr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r[i] = (i == center ? 1.0 : 0.0) - Ap[i];
        p[i] = r[i];
        rr += r[i] * r[i];
    }
    const double tol2 = 1e-24;
    int it = 0;
    const int max_it = static_cast<int>(std::min<std::int64_t>(10 * M, 100000));
    while (rr > tol2 && it < max_it) {
        apply(p, Ap);
        double pAp = 0;
        for (std::size_t i = 0; i < p.size(); ++i) pAp += p[i] * Ap[i];
        const double alpha = rr / pAp;
        double rr_new = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
            rr_new += r[i] * r[i];
        }
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
        ++it;
    }
    if (rr > tol2)
        throw std::runtime_error("fractional_green_column: conjugate gradients did not converge");

    FractionalGreenColumn col;
    col.box_radius = R;
    col.d = d;
    col.values = std::move(x);
    return col;
}

double fractional_green_infinite(const ModelSpec& model, const Site& offset, int box_radius) {
    const double r = std::sqrt(norm2(offset));
    if (box_radius < 4.0 * r)
        throw std::invalid_argument(
            "fractional_green_infinite: box_radius must be >= 4*|offset| (accuracy contract)");
    const FractionalGreenColumn col = fractional_green_column(model, box_radius);
    return col.at(offset);
}

}  // namespace glx
