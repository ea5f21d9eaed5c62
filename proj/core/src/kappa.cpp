#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "glx/green.hpp"

namespace glx {

namespace {

void enumerate_canonical(int d, double radius, std::vector<Site>& out) {
    // nonincreasing nonnegative tuples with 0 < |alpha| <= radius
    Site s = Site::origin(d);
    const double r2 = radius * radius;
    const int rmax = static_cast<int>(std::floor(radius));
    const std::function<void(int, int, double)> rec = [&](int pos, int cap, double acc) {
        if (pos == d) {
            if (acc > 0) out.push_back(s);
            return;
        }
        for (int v = 0; v <= cap; ++v) {
            const double na = acc + static_cast<double>(v) * v;
            if (na > r2 + 1e-9) break;
            s[pos] = v;
            rec(pos + 1, v, na);
        }
        s[pos] = 0;
    };
    rec(0, rmax, 0.0);
}

struct LinearFit {
    double slope = 0, intercept = 0, r2 = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LinearFit f;
    const double den = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    const double sse_den = (n * syy - sy * sy);
    f.r2 = sse_den > 0 ? (n * sxy - sx * sy) * (n * sxy - sx * sy) / (den * sse_den) : 1.0;
    return f;
}

double decay_power(const ModelSpec& model) {
    switch (model.kind) {
        case ModelKind::Dgff: return model.d - 2.0;
        case ModelKind::Membrane: return model.d - 4.0;
        case ModelKind::FractionalGff: return model.d - model.stable_index;
        case ModelKind::MassiveGff: return 0.0;
    }
    return 0.0;
}

}  // namespace

KappaEstimate kappa_estimate(const ModelSpec& model, double search_radius, double rel_tol) {
    model.validate_infinite();
    InfiniteGreenEvaluator eval(model, rel_tol,
                                std::max(32, 4 * static_cast<int>(std::ceil(search_radius))));
    const double g0 = eval.variance();
    if (!(g0 > 0)) throw std::runtime_error("kappa_estimate: g(0) must be positive");

    std::vector<Site> offsets;
    enumerate_canonical(model.d, search_radius, offsets);
    if (offsets.empty()) throw std::invalid_argument("kappa_estimate: empty search ball");

    KappaEstimate est;
    est.search_radius = search_radius;
    est.max_ratio = -std::numeric_limits<double>::infinity();
    std::map<int, double> shell_abs;  // rounded radius -> max |g|/g0
    for (const auto& off : offsets) {
        const double ratio = eval(off) / g0;
        const int shell = static_cast<int>(std::lround(std::sqrt(norm2(off))));
        auto [it, inserted] = shell_abs.emplace(shell, std::abs(ratio));
        if (!inserted) it->second = std::max(it->second, std::abs(ratio));
        if (ratio > est.max_ratio) {
            est.max_ratio = ratio;
            est.argmax_offset = off;
        }
    }
    est.kappa = 1.0 - std::max(0.0, est.max_ratio);

    // Tail certificate: fit the model's decay law on the outer shells and
    // bound sup_{|alpha|>R} |g|/g(0) by the outermost-shell level. For the
    // exponential law the fit is log-linear in r, for the polynomial laws the
    // normalized plateau |g| r^p must be stable.
    std::vector<double> xs, ys;
    const int rmax = shell_abs.rbegin()->first;
    const int r_lo = std::max(2, static_cast<int>(0.55 * rmax));
    double plateau_hi = 0, plateau_lo = std::numeric_limits<double>::infinity();
    const double p = decay_power(model);
    for (const auto& [r, v] : shell_abs) {
        if (r < r_lo || v <= 0) continue;
        if (model.kind == ModelKind::MassiveGff) {
            xs.push_back(r);
            ys.push_back(std::log(v));
        } else {
            const double norm_val = v * std::pow(static_cast<double>(r), p);
            plateau_hi = std::max(plateau_hi, norm_val);
            plateau_lo = std::min(plateau_lo, norm_val);
        }
    }
    if (model.kind == ModelKind::MassiveGff) {
        if (xs.size() >= 3) {
            const LinearFit f = fit_line(xs, ys);
            if (f.slope < 0 && f.r2 > 0.99) {
                est.tail_ratio_bound = 1.2 * shell_abs.rbegin()->second;
                est.tail_certified = est.tail_ratio_bound < est.max_ratio;
                est.note = "exponential decay fit slope " + std::to_string(f.slope);
            } else {
                est.note = "inconclusive: exponential fit failed (r2=" + std::to_string(f.r2) + ")";
            }
        } else {
            est.note = "inconclusive: too few shells for the decay fit";
        }
    } else {
        if (plateau_hi > 0 && plateau_hi / plateau_lo < 1.35) {
            est.tail_ratio_bound = 1.5 * plateau_hi * std::pow(static_cast<double>(rmax), -p);
            est.tail_certified = est.tail_ratio_bound < est.max_ratio;
            est.note = "plateau " + std::to_string(plateau_lo) + ".." + std::to_string(plateau_hi);
        } else {
            est.note = "inconclusive: decay plateau not reached at the scan radius";
        }
    }
    if (!(est.kappa > 0.0 && est.kappa <= 1.0))
        est.note += "; kappa outside (0,1]";
    return est;
}

}  // namespace glx
