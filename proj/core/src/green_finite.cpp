#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "glx/green.hpp"

namespace glx {

std::size_t SiteHash::operator()(const Site& s) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    const auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(s.d));
    for (int i = 0; i < s.d; ++i) mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[i])));
    return static_cast<std::size_t>(h);
}

GreenMatrix::GreenMatrix(std::vector<Site> sites, Eigen::MatrixXd cov, std::string source)
    : sites_(std::move(sites)), cov_(std::move(cov)), source_(std::move(source)) {
    pos_.reserve(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i)
        pos_.emplace(sites_[i], static_cast<std::int64_t>(i));
}

std::int64_t GreenMatrix::position_of(const Site& s) const {
    auto it = pos_.find(s);
    return it == pos_.end() ? -1 : it->second;
}

namespace {

// difference stencil of the Z^d bilaplacian (P - I)^2, full-lattice entries
std::vector<std::pair<Site, double>> bilaplacian_stencil(int d) {
    std::vector<std::pair<Site, double>> st;
    const double inv2d = 1.0 / (2.0 * d);
    st.emplace_back(Site::origin(d), 1.0 + inv2d);
    for (int i = 0; i < d; ++i) {
        for (int sgn : {-1, 1}) {
            Site e = Site::origin(d);
            e[i] = sgn;
            st.emplace_back(e, -1.0 / d);
            Site e2 = Site::origin(d);
            e2[i] = 2 * sgn;
            st.emplace_back(e2, inv2d * inv2d);
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int si : {-1, 1})
                for (int sj : {-1, 1}) {
                    Site e = Site::origin(d);
                    e[i] = si;
                    e[j] = sj;
                    st.emplace_back(e, 2.0 * inv2d * inv2d);
                }
    return st;
}

std::unordered_map<Site, std::int64_t, SiteHash> index_sites(const std::vector<Site>& sites) {
    std::unordered_map<Site, std::int64_t, SiteHash> pos;
    pos.reserve(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) pos.emplace(sites[i], static_cast<std::int64_t>(i));
    if (pos.size() != sites.size()) throw std::invalid_argument("precision: duplicate sites");
    return pos;
}

}  // namespace

Eigen::SparseMatrix<double> sparse_precision(const ModelSpec& model, const std::vector<Site>& sites) {
    model.validate_finite();
    if (model.kind == ModelKind::FractionalGff)
        throw std::invalid_argument("sparse_precision: fractional precision is dense");
    const auto pos = index_sites(sites);
    const int d = model.d;
    std::vector<Eigen::Triplet<double>> trip;
    if (model.kind == ModelKind::Membrane) {
        const auto stencil = bilaplacian_stencil(d);
        trip.reserve(sites.size() * stencil.size());
        for (std::size_t i = 0; i < sites.size(); ++i) {
            for (const auto& [off, val] : stencil) {
                auto it = pos.find(sites[i] + off);
                if (it != pos.end())
                    trip.emplace_back(static_cast<int>(i), static_cast<int>(it->second), val);
            }
        }
    } else {
        const double step = model.kind == ModelKind::MassiveGff ? 1.0 - model.mass : 1.0;
        trip.reserve(sites.size() * (2 * d + 1));
        for (std::size_t i = 0; i < sites.size(); ++i) {
            trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
            for (int k = 0; k < d; ++k)
                for (int sgn : {-1, 1}) {
                    Site nb = sites[i];
                    nb[k] += sgn;
                    auto it = pos.find(nb);
                    if (it != pos.end())
                        trip.emplace_back(static_cast<int>(i), static_cast<int>(it->second),
                                          -step / (2.0 * d));
                }
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(sites.size()), static_cast<int>(sites.size()));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Eigen::MatrixXd dense_precision(const ModelSpec& model, const std::vector<Site>& sites) {
    model.validate_finite();
    if (model.kind == ModelKind::FractionalGff) {
        FractionalKernel kernel(model);
        const auto n = static_cast<Eigen::Index>(sites.size());
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                const double q = kernel.q_entry(sites[static_cast<std::size_t>(i)] -
                                                sites[static_cast<std::size_t>(j)]);
                m(i, j) = (i == j ? 1.0 : 0.0) - q;
                m(j, i) = m(i, j);
            }
        return m;
    }
    return Eigen::MatrixXd(sparse_precision(model, sites));
}

GreenMatrix finite_green(const ModelSpec& model, const std::vector<Site>& sites) {
    const Eigen::MatrixXd prec = dense_precision(model, sites);
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("finite_green: precision matrix is not positive definite (" +
                                 model.name() + ")");
    Eigen::MatrixXd cov =
        llt.solve(Eigen::MatrixXd::Identity(prec.rows(), prec.cols()));
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GreenMatrix(sites, std::move(cov), model.name());
}

GreenMatrix finite_green(const ModelSpec& model, const BoxDomain& domain) {
    return finite_green(model, enumerate_box(domain.d, domain.n));
}

Eigen::MatrixXd squared_resolvent_green(const ModelSpec& model, const std::vector<Site>& sites) {
    const auto pos = index_sites(sites);
    const int d = model.d;
    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (int k = 0; k < d; ++k)
            for (int sgn : {-1, 1}) {
                Site nb = sites[i];
                nb[k] += sgn;
                auto it = pos.find(nb);
                if (it != pos.end())
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(it->second)) -=
                        1.0 / (2.0 * d);
            }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("squared_resolvent_green: I - P_V not positive definite");
    const Eigen::MatrixXd gamma = llt.solve(Eigen::MatrixXd::Identity(n, n));
    return gamma * gamma;
}

}  // namespace glx
