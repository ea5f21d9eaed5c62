#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "glx/green.hpp"
#include "glx/quadrature.hpp"
#include "glx/special.hpp"

namespace glx {

double walk_green_infinite(const ModelSpec& model, const Site& offset, double rel_tol) {
    model.validate_infinite();
    if (model.kind == ModelKind::FractionalGff)
        throw std::invalid_argument("walk_green_infinite: fractional field uses large-box inversion");
    if (offset.d != model.d) throw std::invalid_argument("walk_green_infinite: offset dimension mismatch");

    const int d = model.d;
    int nmax = 0;
    for (int i = 0; i < d; ++i) nmax = std::max(nmax, std::abs(offset[i]));

    const double step_scale = model.kind == ModelKind::MassiveGff ? 1.0 - model.mass : 1.0;
    const double kill = model.kind == ModelKind::MassiveGff ? model.mass : 0.0;
    const int weight_pow = model.kind == ModelKind::Membrane ? 1 : 0;

    std::vector<double> bessel(static_cast<std::size_t>(nmax) + 1);
    const auto integrand = [&](double t) {
        double v = weight_pow ? t : 1.0;
        if (kill > 0) {
            if (kill * t > 1400.0) return 0.0;
            v *= std::exp(-kill * t);
        }
        scaled_bessel_i(step_scale * t / d, nmax, bessel);
        for (int i = 0; i < d; ++i) v *= bessel[static_cast<std::size_t>(std::abs(offset[i]))];
        return v;
    };

    if (kill > 0) {
        // exponentially killed: everything beyond T is below machine noise
        const double T = (45.0 + 2.0 * nmax) / kill;
        return integrate_adaptive(integrand, 0.0, T, rel_tol);
    }
    // algebraic tail t^{1+w-d/2}; split point past the Bessel transition
    const double T = std::max(256.0, 4.0 * (nmax + 1.0) * (nmax + 1.0));
    return integrate_semi_infinite_algebraic(integrand, T, rel_tol);
}

InfiniteGreenEvaluator::InfiniteGreenEvaluator(ModelSpec model, double rel_tol,
                                               int fractional_box_radius)
    : model_(model), rel_tol_(rel_tol), fractional_box_radius_(fractional_box_radius) {
    model_.validate_infinite();
}

double InfiniteGreenEvaluator::operator()(const Site& offset) const {
    const auto key = symmetry_key(offset);
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    double value;
    if (model_.kind == ModelKind::FractionalGff) {
        std::shared_ptr<const FractionalGreenColumn> col;
        {
            std::shared_lock lock(mutex_);
            col = column_;
        }
        if (!col) {
            auto fresh = std::make_shared<FractionalGreenColumn>(
                fractional_green_column(model_, fractional_box_radius_));
            std::unique_lock lock(mutex_);
            if (!column_) column_ = std::move(fresh);
            col = column_;
        }
        Site canonical = Site::origin(model_.d);
        for (int i = 0; i < model_.d; ++i) canonical[i] = key[static_cast<std::size_t>(i)];
        if (4.0 * std::sqrt(norm2(canonical)) > col->box_radius)
            throw std::out_of_range(
                "InfiniteGreenEvaluator: offset beyond the fractional box accuracy contract");
        value = col->at(canonical);
    } else {
        Site canonical = Site::origin(model_.d);
        for (int i = 0; i < model_.d; ++i) canonical[i] = key[static_cast<std::size_t>(i)];
        value = walk_green_infinite(model_, canonical, rel_tol_);
    }
    std::unique_lock lock(mutex_);
    cache_.emplace(key, value);
    return value;
}

double InfiniteGreenEvaluator::variance() const { return (*this)(Site::origin(model_.d)); }

}  // namespace glx
