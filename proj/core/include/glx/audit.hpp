#pragma once

#include <string>
#include <vector>

#include "glx/green.hpp"
#include "glx/model.hpp"

namespace glx {

// (A1) decay table along axis and diagonal directions with the normalized
// ratio g(alpha) |alpha|^p and its plateau estimate.
struct DecayRow {
    std::string direction;
    double radius = 0;
    double g = 0;
    double normalized = 0;
};
struct DecayTable {
    std::vector<DecayRow> rows;
    double plateau = 0;      // eta_2 / omega_{s,d} analogue
    double plateau_lo = 0;
    double plateau_hi = 0;
    double massive_corr = 0;       // correlation of log g vs r (massive only)
    double doubling_shift = 0;     // relative plateau change under box doubling (fractional)
    bool pass = false;
    bool inconclusive = false;
    std::string note;
};
DecayTable audit_decay(const ModelSpec& model, double max_radius);

// (A2) finite-vs-infinite deviations scaled by log N.
struct A2Row {
    int n = 0;
    std::int64_t N = 0;
    double pos_dev_logN = 0;   // max over bulk pairs of (g - g_N)^+ log N
    double neg_dev_logN = 0;   // max over bulk pairs of (g_N - g)^+ log N
    double diag_dev_logN = 0;  // max of (g_N(a,a) - g(0))^+ log N
    bool skipped = false;
    std::string note;
};
struct FiniteVsInfiniteTable {
    std::vector<A2Row> rows;
    bool pass = false;
    std::string note;
};
FiniteVsInfiniteTable audit_finite_vs_infinite(const ModelSpec& model, const std::vector<int>& sizes,
                                               double delta);

// (A3) conditional-variance table sup Var[mu_alpha] (log N)^{2+theta} plus
// the Lemma-claim6 quantity sup (g(0)/Var psi - 1) u^2.
struct A3Row {
    int n = 0;
    std::int64_t N = 0;
    double s_n = 0;
    double sup_varmu_scaled = 0;
    double claim6 = 0;
};
struct ConditionalVarianceTable {
    std::vector<A3Row> rows;
    double theta = 0;
    bool pass = false;
    std::string note;
};
ConditionalVarianceTable audit_conditional_variance(const ModelSpec& model,
                                                    const std::vector<int>& sizes, double delta,
                                                    double theta,
                                                    const DependencyRadiusPolicy& policy);

// Infinite-volume membrane route: Var[mu] = G(0) - G_{B(0,s)}(0,0) over an
// s grid, with the log-log slope.
struct VarMuSlope {
    std::vector<double> s;
    std::vector<double> var_mu;
    double slope = 0;
    bool pass = false;
};
VarMuSlope audit_varmu_slope(const ModelSpec& model, const std::vector<double>& s_grid,
                             double slope_threshold);

// s_N = o(N^{kappa/(d(2-kappa))}) checked numerically: the ratio must shrink
// across the audited sizes.
struct KappaLinkRow {
    std::int64_t N = 0;
    double s_n = 0;
    double allowed = 0;  // N^{kappa/(d(2-kappa))}
    double ratio = 0;
};
struct KappaLink {
    std::vector<KappaLinkRow> rows;
    double kappa = 0;
    bool ok = false;
};
KappaLink audit_kappa_link(const ModelSpec& model, const KappaEstimate& kappa,
                           const DependencyRadiusPolicy& policy, const std::vector<int>& sizes);

// Hypothesis certificate consumed by downstream reports: pass /
// inconclusive flags only, never silent defaults.
struct AuditCertificate {
    bool decay_pass = false;
    bool decay_inconclusive = false;
    bool a2_pass = false;
    bool a3_pass = false;
    bool kappa_certified = false;
    bool kappa_link_ok = false;
    double kappa = 0;
    std::string notes;
};

}  // namespace glx
