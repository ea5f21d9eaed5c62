#include "glx/model.hpp"

#include <cmath>
#include <stdexcept>

namespace glx {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Dgff: return "dgff";
        case ModelKind::Membrane: return "membrane";
        case ModelKind::MassiveGff: return "massive";
        case ModelKind::FractionalGff: return "fractional";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "dgff") return ModelKind::Dgff;
    if (name == "membrane") return ModelKind::Membrane;
    if (name == "massive") return ModelKind::MassiveGff;
    if (name == "fractional") return ModelKind::FractionalGff;
    throw std::invalid_argument("unknown model kind: " + name);
}

ModelSpec ModelSpec::dgff(int d) { return ModelSpec{ModelKind::Dgff, d, 0, 0, 1}; }
ModelSpec ModelSpec::membrane(int d) { return ModelSpec{ModelKind::Membrane, d, 0, 0, 1}; }
ModelSpec ModelSpec::massive(int d, double theta) { return ModelSpec{ModelKind::MassiveGff, d, theta, 0, 1}; }
ModelSpec ModelSpec::fractional(int d, double s, double rho) {
    return ModelSpec{ModelKind::FractionalGff, d, 0, s, rho};
}

void ModelSpec::validate_finite() const {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("model dimension must be in [1, 8]");
    switch (kind) {
        case ModelKind::Dgff:
        case ModelKind::Membrane:
            break;
        case ModelKind::MassiveGff:
            if (!(mass > 0.0 && mass < 1.0))
                throw std::invalid_argument("massive GFF requires mass in (0,1)");
            break;
        case ModelKind::FractionalGff:
            if (!(stable_index > 0.0 && stable_index < std::min(2.0, static_cast<double>(d))))
                throw std::invalid_argument("fractional GFF requires s in (0, min(2,d))");
            if (!(stable_scale > 0.0))
                throw std::invalid_argument("fractional GFF requires rho > 0");
            break;
    }
}

void ModelSpec::validate_infinite() const {
    validate_finite();
    if (kind == ModelKind::Dgff && d < 3)
        throw std::invalid_argument("dgff requires d>=3");
    if (kind == ModelKind::Membrane && d < 5)
        throw std::invalid_argument("membrane requires d>=5");
}

std::string ModelSpec::name() const {
    std::string s = to_string(kind) + "_d" + std::to_string(d);
    if (kind == ModelKind::MassiveGff) s += "_m" + std::to_string(mass);
    if (kind == ModelKind::FractionalGff)
        s += "_s" + std::to_string(stable_index) + "_rho" + std::to_string(stable_scale);
    return s;
}

DependencyRadiusPolicy DependencyRadiusPolicy::defaults_for(const ModelSpec& model, double theta) {
    DependencyRadiusPolicy p;
    p.kind = model.kind;
    p.theta = theta;
    switch (model.kind) {
        case ModelKind::Membrane:
            p.T = (2.0 + theta) / (model.d - 4) + 0.01;
            break;
        case ModelKind::Dgff:
            // not restated in this paper; (log N)^T with T > (2+theta)/(d-2)
            p.T = (2.0 + theta) / (model.d - 2) + 0.01;
            break;
        case ModelKind::FractionalGff:
            p.xi = 2.5;
            break;
        case ModelKind::MassiveGff:
            break;
    }
    return p;
}

double dependency_radius(const DependencyRadiusPolicy& policy, const ModelSpec& model, double N) {
    if (!(N >= 2.0)) throw std::invalid_argument("dependency_radius: N >= 2 required");
    const double logN = std::log(N);
    switch (policy.kind) {
        case ModelKind::MassiveGff:
            return logN;
        case ModelKind::Membrane: {
            if (model.d <= 4) throw std::invalid_argument("membrane s_N policy requires d>=5");
            const double min_T = (2.0 + policy.theta) / (model.d - 4);
            if (!(policy.T > min_T))
                throw std::invalid_argument("membrane s_N policy requires T > (2+theta)/(d-4)");
            return std::pow(logN, policy.T);
        }
        case ModelKind::Dgff: {
            if (model.d <= 2) throw std::invalid_argument("dgff s_N policy requires d>=3");
            const double min_T = (2.0 + policy.theta) / (model.d - 2);
            if (!(policy.T > min_T))
                throw std::invalid_argument("dgff s_N policy requires T > (2+theta)/(d-2)");
            return std::pow(logN, policy.T);
        }
        case ModelKind::FractionalGff: {
            if (!(model.stable_index < model.d))
                throw std::invalid_argument("fractional s_N policy requires s < d");
            if (!(policy.xi > 2.0))
                throw std::invalid_argument("fractional s_N policy requires xi > 2");
            return std::pow(logN, policy.xi / (model.d - model.stable_index));
        }
    }
    throw std::logic_error("unreachable");
}

double dependency_radius_constraint_exponent(double kappa, int d) {
    return kappa / (d * (2.0 - kappa));
}

}  // namespace glx
