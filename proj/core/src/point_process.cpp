#include "glx/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glx/parallel.hpp"

namespace glx {

bool CellSpec::contains_position(const std::array<double, kMaxDim>& t, int d) const {
    if (rect.size() != static_cast<std::size_t>(d)) return false;
    for (int i = 0; i < d; ++i) {
        const auto& [lo, hi] = rect[static_cast<std::size_t>(i)];
        if (t[static_cast<std::size_t>(i)] < lo || t[static_cast<std::size_t>(i)] >= hi) return false;
    }
    return true;
}

bool CellSpec::contains_level(double z) const {
    for (const auto& iv : levels)
        if (z > iv.lo && z <= iv.hi) return true;
    return false;
}

double CellSpec::truncated_measure(double delta, int d) const {
    double m = 1.0;
    for (int i = 0; i < d; ++i) {
        const auto& [lo, hi] = rect[static_cast<std::size_t>(i)];
        const double a = std::max(lo, delta);
        const double b = std::min(hi, 1.0 - delta);
        if (b <= a) return 0.0;
        m *= b - a;
    }
    return m;
}

PointMeasure exceedance_points(const Eigen::VectorXd& field, const BoxDomain& domain,
                               const ScalingConstants& scaling, MaximaMode mode) {
    PointMeasure pm;
    pm.d = domain.d;
    const auto indices = mode == MaximaMode::Bulk ? bulk_indices(domain) : std::vector<std::int64_t>{};
    const std::int64_t count = mode == MaximaMode::Bulk ? static_cast<std::int64_t>(indices.size())
                                                        : domain.volume();
    pm.position.reserve(static_cast<std::size_t>(count));
    pm.level.reserve(static_cast<std::size_t>(count));
    const auto push = [&](std::int64_t idx) {
        const Site s = domain.site_at(idx);
        std::array<double, kMaxDim> t{};
        for (int i = 0; i < domain.d; ++i)
            t[static_cast<std::size_t>(i)] = static_cast<double>(s[i]) / domain.n;
        pm.position.push_back(t);
        pm.level.push_back((field(static_cast<Eigen::Index>(idx)) - scaling.b) / scaling.a);
    };
    if (mode == MaximaMode::Bulk) {
        for (auto idx : indices) push(idx);
    } else {
        for (std::int64_t idx = 0; idx < domain.volume(); ++idx) push(idx);
    }
    return pm;
}

CellIntensity poisson_intensity(const CellSpec& cell, double delta, int d) {
    double level_mass = 0;
    for (const auto& iv : cell.levels) {
        const double hi_term = std::isinf(iv.hi) ? 0.0 : std::exp(-iv.hi);
        level_mass += std::exp(-iv.lo) - hi_term;
    }
    CellIntensity out;
    out.expected = cell.truncated_measure(delta, d) * level_mass;
    out.void_prob = std::exp(-out.expected);
    return out;
}

namespace {

// interval-indicator analogue of the b-terms over the union of the cells
struct IntervalFamilyBounds {
    double b1 = 0, b2 = 0, b3 = 0;
    std::vector<double> lambda_j;
};

IntervalFamilyBounds interval_family_bounds(const ModelSpec& model, const BoxDomain& domain,
                                            const std::shared_ptr<const GreenMatrix>& cov,
                                            const std::vector<CellSpec>& cells,
                                            const ScalingConstants& sc, double s_n,
                                            const QuadratureConfig& cfg, int workers) {
    // family members: bulk sites inside some cell's rectangle
    struct Member {
        std::int64_t idx;
        int cell;
        double p;
        double var;
    };
    std::vector<Member> members;
    const auto bulk = bulk_indices(domain);
    for (auto idx : bulk) {
        const Site s = domain.site_at(idx);
        std::array<double, kMaxDim> t{};
        for (int i = 0; i < domain.d; ++i)
            t[static_cast<std::size_t>(i)] = static_cast<double>(s[i]) / domain.n;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (!cells[j].contains_position(t, domain.d)) continue;
            Member m;
            m.idx = idx;
            m.cell = static_cast<int>(j);
            m.var = cov->cov()(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx));
            const double sd = std::sqrt(m.var);
            m.p = 0;
            for (const auto& iv : cells[j].levels) {
                const double hi = std::isinf(iv.hi) ? 0.0 : norm_tail(sc.u(iv.hi) / sd);
                m.p += norm_tail(sc.u(iv.lo) / sd) - hi;
            }
            members.push_back(m);
            break;  // rectangles are disjoint
        }
    }
    IntervalFamilyBounds out;
    out.lambda_j.assign(cells.size(), 0.0);
    for (const auto& m : members) out.lambda_j[static_cast<std::size_t>(m.cell)] += m.p;

    // neighborhood positions within the member list
    std::vector<std::int32_t> member_pos(static_cast<std::size_t>(domain.volume()), -1);
    for (std::size_t i = 0; i < members.size(); ++i)
        member_pos[static_cast<std::size_t>(members[i].idx)] = static_cast<std::int32_t>(i);

    ResidualVarianceCache rvc(model, domain, s_n, VarianceMode::FiniteVolume);
    const GaussHermite& gh = GaussHermite::get(cfg.gauss_hermite_order);

    std::vector<double> b1_per(members.size(), 0.0), b2_per(members.size(), 0.0),
        b3_per(members.size(), 0.0);
    parallel_for_chunks(static_cast<std::int64_t>(members.size()), 16, workers,
                        [&](std::int64_t lo, std::int64_t hi, std::int64_t) {
        for (std::int64_t ii = lo; ii < hi; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const Member& mi = members[i];
            const Site alpha = domain.site_at(mi.idx);
            double b1 = 0, b2 = 0;
            for (const auto& b : ball_sites(alpha, s_n, domain)) {
                const auto pos = member_pos[static_cast<std::size_t>(domain.index_of(b))];
                if (pos < 0) continue;
                const Member& mj = members[static_cast<std::size_t>(pos)];
                b1 += mi.p * mj.p;
                if (static_cast<std::size_t>(pos) == i) continue;
                const double cij = cov->cov()(static_cast<Eigen::Index>(mi.idx),
                                              static_cast<Eigen::Index>(mj.idx));
                // joint probability of the two interval unions by
                // inclusion-exclusion over the four tail corners
                for (const auto& ia : cells[static_cast<std::size_t>(mi.cell)].levels)
                    for (const auto& ib : cells[static_cast<std::size_t>(mj.cell)].levels) {
                        const double xa = sc.u(ia.lo);
                        const double ya = std::isinf(ia.hi)
                                              ? std::numeric_limits<double>::infinity()
                                              : sc.u(ia.hi);
                        const double xb = sc.u(ib.lo);
                        const double yb = std::isinf(ib.hi)
                                              ? std::numeric_limits<double>::infinity()
                                              : sc.u(ib.hi);
                        b2 += bivariate_tail2(mi.var, mj.var, cij, xa, xb, cfg) -
                              bivariate_tail2(mi.var, mj.var, cij, xa, yb, cfg) -
                              bivariate_tail2(mi.var, mj.var, cij, ya, xb, cfg) +
                              bivariate_tail2(mi.var, mj.var, cij, ya, yb, cfg);
                    }
            }
            const auto [var_mu, var_psi] = rvc.var_mu_psi(alpha, mi.var);
            double b3 = 0;
            if (var_mu > 1e-300) {
                const double s_mu = std::sqrt(var_mu), s_psi = std::sqrt(var_psi);
                double acc = 0;
                for (std::size_t k = 0; k < gh.x.size(); ++k) {
                    const double mu = std::sqrt(2.0) * s_mu * gh.x[k];
                    double cond = 0;
                    for (const auto& iv : cells[static_cast<std::size_t>(mi.cell)].levels) {
                        const double hi_t = std::isinf(iv.hi)
                                                ? 0.0
                                                : norm_tail((sc.u(iv.hi) - mu) / s_psi);
                        cond += norm_tail((sc.u(iv.lo) - mu) / s_psi) - hi_t;
                    }
                    acc += gh.w[k] * std::abs(cond - mi.p);
                }
                b3 = acc / std::sqrt(M_PI);
            }
            b1_per[i] = b1;
            b2_per[i] = b2;
            b3_per[i] = b3;
        }
    });
    for (std::size_t i = 0; i < members.size(); ++i) {
        out.b1 += b1_per[i];
        out.b2 += b2_per[i];
        out.b3 += b3_per[i];
    }
    return out;
}

}  // namespace

KallenbergReport kallenberg_check(const ModelSpec& model, const BoxDomain& domain,
                                  const GaussianSampler& sampler,
                                  const std::shared_ptr<const GreenMatrix>& cov,
                                  const std::vector<CellSpec>& cells, double g0, double s_n,
                                  int replicates, std::uint64_t seed, int workers,
                                  const QuadratureConfig& cfg) {
    if (replicates < 1) throw std::invalid_argument("kallenberg_check: replicates >= 1");
    for (const auto& c : cells) {
        if (c.rect.size() != static_cast<std::size_t>(domain.d))
            throw std::invalid_argument("kallenberg_check: cell rectangle dimension mismatch");
        if (c.levels.empty()) throw std::invalid_argument("kallenberg_check: cell without levels");
    }
    const ScalingConstants sc = scaling_constants(g0, static_cast<double>(domain.volume()));

    // static site -> cell assignment over the bulk
    const auto bulk = bulk_indices(domain);
    std::vector<std::pair<std::int64_t, int>> assigned;  // (site index, cell)
    for (auto idx : bulk) {
        const Site s = domain.site_at(idx);
        std::array<double, kMaxDim> t{};
        for (int i = 0; i < domain.d; ++i)
            t[static_cast<std::size_t>(i)] = static_cast<double>(s[i]) / domain.n;
        for (std::size_t j = 0; j < cells.size(); ++j)
            if (cells[j].contains_position(t, domain.d)) {
                assigned.emplace_back(idx, static_cast<int>(j));
                break;
            }
    }

    const auto k = cells.size();
    struct Acc {
        std::vector<double> sum, sumsq;
        std::vector<std::int64_t> voids;
        std::int64_t joint_voids = 0;
    };
    const std::int64_t chunk = 64;
    const std::int64_t n_chunks = (replicates + chunk - 1) / chunk;
    std::vector<Acc> acc(static_cast<std::size_t>(n_chunks));

    parallel_for_chunks(replicates, chunk, workers, [&](std::int64_t lo, std::int64_t hi,
                                                        std::int64_t ci) {
        Acc a;
        a.sum.assign(k, 0.0);
        a.sumsq.assign(k, 0.0);
        a.voids.assign(k, 0);
        Eigen::VectorXd field;
        std::vector<std::int64_t> count(k, 0);
        for (std::int64_t r = lo; r < hi; ++r) {
            sampler.sample_into(seed, r, field);
            std::fill(count.begin(), count.end(), 0);
            for (const auto& [idx, cell] : assigned) {
                const double z = (field(static_cast<Eigen::Index>(idx)) - sc.b) / sc.a;
                if (cells[static_cast<std::size_t>(cell)].contains_level(z))
                    ++count[static_cast<std::size_t>(cell)];
            }
            bool all_zero = true;
            for (std::size_t j = 0; j < k; ++j) {
                a.sum[j] += static_cast<double>(count[j]);
                a.sumsq[j] += static_cast<double>(count[j]) * static_cast<double>(count[j]);
                if (count[j] == 0)
                    ++a.voids[j];
                else
                    all_zero = false;
            }
            if (all_zero) ++a.joint_voids;
        }
        acc[static_cast<std::size_t>(ci)] = std::move(a);
    });

    KallenbergReport rep;
    rep.replicates = replicates;
    rep.u_reference = sc.u(0);
    std::vector<double> sum(k, 0), sumsq(k, 0);
    std::vector<std::int64_t> voids(k, 0);
    std::int64_t joint = 0;
    for (const auto& a : acc) {
        if (a.sum.empty()) continue;
        for (std::size_t j = 0; j < k; ++j) {
            sum[j] += a.sum[j];
            sumsq[j] += a.sumsq[j];
            voids[j] += a.voids[j];
        }
        joint += a.joint_voids;
    }

    const auto bounds =
        interval_family_bounds(model, domain, cov, cells, sc, s_n, cfg, workers);
    double lambda_total = 0, intensity_total = 0;
    const double R = static_cast<double>(replicates);
    for (std::size_t j = 0; j < k; ++j) {
        KallenbergCellRow row;
        row.id = cells[j].id.empty() ? "cell" + std::to_string(j) : cells[j].id;
        row.empirical_mean = sum[j] / R;
        row.empirical_var = std::max(0.0, sumsq[j] / R - row.empirical_mean * row.empirical_mean);
        row.intensity = poisson_intensity(cells[j], domain.delta, domain.d).expected;
        row.var_mean_ratio = row.empirical_mean > 0 ? row.empirical_var / row.empirical_mean : 0;
        row.void_freq = static_cast<double>(voids[j]) / R;
        row.void_limit = std::exp(-row.intensity);
        row.mean_se = std::sqrt(row.empirical_var / R);
        row.lambda_exact = bounds.lambda_j[j];
        std::int64_t in_cell = 0;
        for (const auto& [idx, cell] : assigned)
            if (cell == static_cast<int>(j)) ++in_cell;
        row.sites_in_cell = in_cell;
        lambda_total += row.lambda_exact;
        intensity_total += row.intensity;
        rep.cells.push_back(row);
    }
    rep.joint_void_freq = static_cast<double>(joint) / R;
    rep.joint_void_limit = std::exp(-intensity_total);
    rep.joint_void_exact = std::exp(-lambda_total);
    const double min_lambda =
        *std::min_element(bounds.lambda_j.begin(), bounds.lambda_j.end());
    rep.agg2_bound = 2.0 * std::min(1.0, 1.4 / std::sqrt(std::max(min_lambda, 1e-300))) *
                     (2.0 * bounds.b1 + 2.0 * bounds.b2 + bounds.b3);
    return rep;
}

}  // namespace glx
