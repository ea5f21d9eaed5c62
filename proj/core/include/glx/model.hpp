#pragma once

#include <string>

#include "glx/lattice.hpp"

namespace glx {

enum class ModelKind { Dgff, Membrane, MassiveGff, FractionalGff };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Which interface model plus its parameters. `mass` is the killing rate
// theta in (0,1) of the massive walk; `stable_index`/`stable_scale` are the
// (s, rho) of the isotropic stable law driving the fractional field.
struct ModelSpec {
    ModelKind kind = ModelKind::MassiveGff;
    int d = 1;
    double mass = 0.0;
    double stable_index = 0.0;
    double stable_scale = 1.0;

    static ModelSpec dgff(int d);
    static ModelSpec membrane(int d);
    static ModelSpec massive(int d, double theta);
    static ModelSpec fractional(int d, double s, double rho = 1.0);

    // Finite-volume constraints only: the Gibbs measure on a finite set is
    // well defined for the membrane in any d and for the DGFF in any d.
    void validate_finite() const;

    // Supercritical constraints needed for the infinite-volume objects:
    // DGFF d >= 3, membrane d >= 5, fractional s < min(2, d).
    void validate_infinite() const;

    std::string name() const;
};

// s_N policy parameters: T for membrane/DGFF-style (log N)^T radii, xi for
// the fractional (log N)^{xi/(d-s)}, theta the audit exponent of (A3).
struct DependencyRadiusPolicy {
    ModelKind kind = ModelKind::MassiveGff;
    double T = 0.0;
    double xi = 0.0;
    double theta = 1.0;

    static DependencyRadiusPolicy defaults_for(const ModelSpec& model, double theta = 1.0);
};

// Model-specific neighborhood radius s_N; throws on unsupported parameters
// (membrane d <= 4, fractional s >= d, exponents below the admissible bound).
double dependency_radius(const DependencyRadiusPolicy& policy, const ModelSpec& model, double N);

// Exponent kappa_model in the constraint s_N = o(N^{kappa/(d(2-kappa))}),
// audited numerically against the computed kappa.
double dependency_radius_constraint_exponent(double kappa, int d);

}  // namespace glx
