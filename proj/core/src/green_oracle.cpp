#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "glx/green.hpp"

namespace glx {

namespace {

// symmetric substochastic one-step matrix of the killed walk on the domain
Eigen::MatrixXd step_matrix(const ModelSpec& model, const std::vector<Site>& sites) {
    const auto n = static_cast<Eigen::Index>(sites.size());
    if (model.kind == ModelKind::FractionalGff) {
        FractionalKernel kernel(model);
        Eigen::MatrixXd s(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                s(i, j) = kernel.q_entry(sites[static_cast<std::size_t>(i)] -
                                         sites[static_cast<std::size_t>(j)]);
                s(j, i) = s(i, j);
            }
        return s;
    }
    std::unordered_map<Site, std::int64_t, SiteHash> pos;
    for (std::size_t i = 0; i < sites.size(); ++i) pos.emplace(sites[i], static_cast<std::int64_t>(i));
    const int d = model.d;
    const double step = model.kind == ModelKind::MassiveGff ? (1.0 - model.mass) / (2.0 * d)
                                                            : 1.0 / (2.0 * d);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (int k = 0; k < d; ++k)
            for (int sgn : {-1, 1}) {
                Site nb = sites[i];
                nb[k] += sgn;
                auto it = pos.find(nb);
                if (it != pos.end())
                    s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(it->second)) = step;
            }
    return s;
}

}  // namespace

WalkOracleResult killed_walk_green_oracle(const ModelSpec& model, const std::vector<Site>& domain,
                                          const Site& a, const Site& b, WalkWeight weight,
                                          double tol, int max_steps) {
    model.validate_finite();
    if (domain.size() > 4096)
        throw std::invalid_argument("killed_walk_green_oracle: domain too large for the oracle");
    const Eigen::MatrixXd S = step_matrix(model, domain);
    const auto n = S.rows();

    std::int64_t ia = -1, ib = -1;
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (domain[i] == a) ia = static_cast<std::int64_t>(i);
        if (domain[i] == b) ib = static_cast<std::int64_t>(i);
    }
    if (ia < 0 || ib < 0) throw std::invalid_argument("killed_walk_green_oracle: endpoints not in domain");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double lam = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(n - 1)));
    if (!(lam < 1.0))
        throw std::runtime_error("killed_walk_green_oracle: walk is not killed (spectral norm >= 1)");

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(ia) = 1.0;
    double value = 0.0;
    double tail = std::numeric_limits<double>::infinity();
    int m = 0;
    for (; m <= max_steps; ++m) {
        const double w = weight == WalkWeight::Unit ? 1.0 : static_cast<double>(m) + 1.0;
        value += w * v(ib);
        const double vnorm = v.norm();
        if (weight == WalkWeight::Unit) {
            tail = vnorm * lam / (1.0 - lam);
        } else {
            tail = vnorm * ((m + 1.0) * lam / (1.0 - lam) + lam / ((1.0 - lam) * (1.0 - lam)));
        }
        if (tail <= tol) break;
        v = S * v;
    }
    if (tail > tol)
        throw std::runtime_error(
            "killed_walk_green_oracle: certified tail bound not reached within the step cap");
    return {value, tail, m, lam};
}

}  // namespace glx
