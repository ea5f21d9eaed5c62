#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "glx/green.hpp"
#include "glx/quadrature.hpp"

using namespace glx;

namespace {

// Oracle: massive 1-d walk sum sum_m (1-theta)^m P_0[S_m = beta] by direct
// dynamic programming on a wide interval (no boundary within reach).
double massive_walk_sum_1d(double theta, int offset, int steps) {
    const int R = steps + 2;
    std::vector<double> cur(static_cast<std::size_t>(2 * R + 1), 0.0), nxt(cur.size(), 0.0);
    cur[static_cast<std::size_t>(R)] = 1.0;
    double acc = offset == 0 ? 1.0 : 0.0;
    double weight = 1.0;
    for (int m = 1; m <= steps; ++m) {
        weight *= 1.0 - theta;
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (int x = -R + 1; x < R; ++x) {
            const double v = cur[static_cast<std::size_t>(x + R)];
            if (v == 0) continue;
            nxt[static_cast<std::size_t>(x - 1 + R)] += 0.5 * v;
            nxt[static_cast<std::size_t>(x + 1 + R)] += 0.5 * v;
        }
        cur.swap(nxt);
        acc += weight * cur[static_cast<std::size_t>(offset + R)];
    }
    return acc;
}

// Oracle: DGFF d=3 return probabilities p_m = P_0[S_m = 0] by a folded
// octant DP, with a local-CLT tail fitted on the computed values.
double dgff_gamma0_walk_oracle(int steps, int radius, double* tail_out) {
    const int W = radius + 1;
    const auto idx = [W](int x, int y, int z) {
        return (static_cast<std::size_t>(x) * W + static_cast<std::size_t>(y)) * W +
               static_cast<std::size_t>(z);
    };
    std::vector<double> cur(static_cast<std::size_t>(W) * W * W, 0.0), nxt(cur.size(), 0.0);
    cur[idx(0, 0, 0)] = 1.0;
    std::vector<double> p(static_cast<std::size_t>(steps) + 1, 0.0);
    p[0] = 1.0;
    for (int m = 1; m <= steps; ++m) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (int x = 0; x <= radius; ++x)
            for (int y = 0; y <= radius; ++y)
                for (int z = 0; z <= radius; ++z) {
                    const double v = cur[idx(x, y, z)];
                    if (v == 0) continue;
                    const auto kick = [&](int cx, int cy, int cz, int c) {
                        // folded axis move: from 0 both signs land on 1
                        if (c == 0) {
                            nxt[idx(cx, cy, cz)] += v / 3.0;
                        } else {
                            if ((cx > radius) || (cy > radius) || (cz > radius)) return;
                            nxt[idx(cx, cy, cz)] += v / 6.0;
                        }
                    };
                    if (x == 0) kick(1, y, z, 0);
                    else {
                        kick(x - 1, y, z, 1);
                        if (x + 1 <= radius) kick(x + 1, y, z, 1);
                    }
                    if (y == 0) kick(x, 1, z, 0);
                    else {
                        kick(x, y - 1, z, 1);
                        if (y + 1 <= radius) kick(x, y + 1, z, 1);
                    }
                    if (z == 0) kick(x, y, 1, 0);
                    else {
                        kick(x, y, z - 1, 1);
                        if (z + 1 <= radius) kick(x, y, z + 1, 1);
                    }
                }
        cur.swap(nxt);
        p[static_cast<std::size_t>(m)] = cur[idx(0, 0, 0)];
    }
    double partial = 0;
    for (double v : p) partial += v;
    // local CLT: p_m ~ 2 (3/(2 pi m))^{3/2} (1 + c1/m) for even m; fit c1
    const double amp = 2.0 * std::pow(3.0 / (2.0 * M_PI), 1.5);
    double c1_acc = 0;
    int c1_n = 0;
    for (int m = steps / 2; m <= steps; m += 2) {
        const double lead = amp * std::pow(static_cast<double>(m), -1.5);
        c1_acc += (p[static_cast<std::size_t>(m)] / lead - 1.0) * m;
        ++c1_n;
    }
    const double c1 = c1_acc / c1_n;
    // tail sum over even m > steps
    double tail = 0;
    const double m0 = steps + 2;
    // Euler-Maclaurin on f(k) = (2k)^{-3/2}, k >= steps/2 + 1
    const double k0 = m0 / 2.0;
    tail += amp * std::pow(2.0, -1.5) * (2.0 * std::pow(k0, -0.5) + 0.5 * std::pow(k0, -1.5));
    tail += amp * c1 * std::pow(2.0, -2.5) * (std::pow(k0, -1.5) / 1.5);
    if (tail_out) *tail_out = tail;
    return partial + tail;
}

}  // namespace

TEST_CASE("massive closed-form anchors, both routes") {
    auto m = ModelSpec::massive(1, 0.5);
    const double g0_exact = 2.0 / std::sqrt(3.0);
    const double g1_exact = 2.0 * (2.0 / std::sqrt(3.0) - 1.0);
    CHECK(std::abs(walk_green_infinite(m, Site{0}) - g0_exact) < 1e-9);
    CHECK(std::abs(walk_green_infinite(m, Site{1}) - g1_exact) < 1e-9);
    CHECK(std::abs(massive_walk_sum_1d(0.5, 0, 80) - g0_exact) < 1e-10);
    CHECK(std::abs(massive_walk_sum_1d(0.5, 1, 80) - g1_exact) < 1e-10);
    // resolvent identity (I - (1-theta) P) g = delta at 0 for other masses
    for (double theta : {0.2, 0.7}) {
        auto mm = ModelSpec::massive(1, theta);
        const double g0 = walk_green_infinite(mm, Site{0});
        const double g1 = walk_green_infinite(mm, Site{1});
        CHECK(g0 - (1.0 - theta) * g1 == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("dgff d3 variance against the truncated walk-sum oracle") {
    double tail = 0;
    const double oracle = dgff_gamma0_walk_oracle(1200, 88, &tail);
    const double value = walk_green_infinite(ModelSpec::dgff(3), Site{0, 0, 0});
    CHECK(tail < 0.03);  // the fitted tail is a visible but small correction
    CHECK(std::abs(value - oracle) < 1e-4);
    // Watson's closed form for the simple cubic lattice
    CHECK(value == doctest::Approx(1.5163860591519780).epsilon(1e-8));
}

TEST_CASE("infinite evaluator caching and lattice symmetry") {
    InfiniteGreenEvaluator eval(ModelSpec::massive(2, 0.3));
    const double a = eval(Site{2, -1});
    CHECK(eval(Site{-1, 2}) == a);
    CHECK(eval(Site{1, -2}) == a);
    CHECK(eval(Site{2, 1}) == a);
    CHECK_THROWS(walk_green_infinite(ModelSpec::dgff(2), Site{0, 0}));
    CHECK_THROWS(walk_green_infinite(ModelSpec::membrane(4), Site{0, 0, 0, 0}));
}

TEST_CASE("finite green trivial anchors") {
    auto m1 = ModelSpec::massive(1, 0.3);
    auto g = finite_green(m1, std::vector<Site>{Site{0}});
    CHECK(g.cov()(0, 0) == doctest::Approx(1.0));  // walk dies on the first step

    auto mem1 = ModelSpec::membrane(1);
    auto gm = finite_green(mem1, std::vector<Site>{Site{0}});
    CHECK(gm.cov()(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("finite green equals the killed path sum") {
    struct Case {
        ModelSpec model;
        int n;
        double tol;
    };
    const std::vector<Case> cases = {{ModelSpec::dgff(3), 4, 1e-8},
                                     {ModelSpec::massive(1, 0.5), 24, 1e-8},
                                     {ModelSpec::fractional(2, 1.0, 1.0), 6, 1e-8}};
    for (const auto& c : cases) {
        const BoxDomain box(c.model.d, c.n);
        const auto sites = enumerate_box(c.model.d, c.n);
        const GreenMatrix g = finite_green(c.model, box);
        // spot-check a spread of entries
        for (std::int64_t i = 0; i < box.volume(); i += std::max<std::int64_t>(1, box.volume() / 5))
            for (std::int64_t j = i; j < box.volume();
                 j += std::max<std::int64_t>(1, box.volume() / 4)) {
                const auto o = killed_walk_green_oracle(c.model, sites, sites[static_cast<std::size_t>(i)],
                                                        sites[static_cast<std::size_t>(j)],
                                                        WalkWeight::Unit, c.tol * 0.1);
                CHECK(std::abs(o.value - g.cov()(i, j)) < c.tol);
            }
    }
}

TEST_CASE("membrane path sum equals the squared resolvent, not the BVP matrix") {
    auto mem = ModelSpec::membrane(5);
    const BoxDomain box(5, 3);
    const auto sites = enumerate_box(5, 3);
    const Eigen::MatrixXd gbar = squared_resolvent_green(mem, sites);
    const GreenMatrix bvp = finite_green(mem, box);
    const Site center{1, 1, 1, 1, 1};
    const auto ic = box.index_of(center);
    const auto o = killed_walk_green_oracle(mem, sites, center, center, WalkWeight::LinearPlusOne, 1e-8);
    CHECK(std::abs(o.value - gbar(ic, ic)) < 1e-6);
    // Gamma_N-convolution route: Gbar = Gamma * Gamma entrywise
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(box.volume(), box.volume());
    {
        auto dg = ModelSpec::dgff(5);
        gamma = finite_green(dg, box).cov();
    }
    CHECK((gamma * gamma - gbar).cwiseAbs().maxCoeff() < 1e-9);
    // the paper's BVP matrix is a different object near the boundary
    CHECK((bvp.cov() - gbar).cwiseAbs().maxCoeff() > 1e-3);

    // single-site domain with weight 1 equals 1
    auto ms = ModelSpec::massive(1, 0.5);
    const auto one = killed_walk_green_oracle(ms, {Site{0}}, Site{0}, Site{0}, WalkWeight::Unit, 1e-12);
    CHECK(one.value == doctest::Approx(1.0));
}

TEST_CASE("variance monotonicity on nested centered boxes") {
    // boxes [0, n-1]^d around a shared center via translation
    const auto nested_diag = [](const ModelSpec& model, int n_small, int n_big) {
        const BoxDomain small(model.d, n_small), big(model.d, n_big);
        const GreenMatrix gs = finite_green(model, small), gb = finite_green(model, big);
        const int shift = (n_big - n_small) / 2;
        double worst = 0;
        for (std::int64_t i = 0; i < small.volume(); ++i) {
            Site s = small.site_at(i);
            Site t = s;
            for (int k = 0; k < model.d; ++k) t[k] += shift;
            worst = std::min(worst, gb.cov()(big.index_of(t), big.index_of(t)) -
                                        gs.cov()(i, i));
        }
        return worst;
    };
    CHECK(nested_diag(ModelSpec::dgff(3), 3, 5) >= -1e-12);
    CHECK(nested_diag(ModelSpec::massive(2, 0.3), 3, 7) >= -1e-12);
    CHECK(nested_diag(ModelSpec::membrane(5), 3, 5) >= -1e-12);
    CHECK(nested_diag(ModelSpec::fractional(2, 1.0, 1.0), 5, 7) >= -1e-12);
}

TEST_CASE("center variance grows toward the stationary value") {
    auto m = ModelSpec::massive(2, 0.3);
    const double g0 = walk_green_infinite(m, Site{0, 0});
    double prev = 0;
    for (int n : {3, 5, 9, 15}) {
        const BoxDomain box(2, n);
        const Site c{n / 2, n / 2};
        const double v = finite_green(m, box).cov()(box.index_of(c), box.index_of(c));
        CHECK(v > prev);
        CHECK(v < g0);
        prev = v;
    }
    CHECK(g0 - prev < 1e-4);
}

TEST_CASE("stable density closed forms and cross-route") {
    // multivariate Cauchy c_d rho / (rho^2 + |x|^2)^{(d+1)/2}
    for (int d : {1, 2}) {
        const double cd = std::tgamma((d + 1) / 2.0) / std::pow(M_PI, (d + 1) / 2.0);
        for (double r : {0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 3.1, 5.0, 8.0, 12.0}) {
            std::vector<double> x(static_cast<std::size_t>(d), 0.0);
            x[0] = r;
            const double want = cd / std::pow(1.0 + r * r, (d + 1) / 2.0);
            CHECK(std::abs(stable_density(x, d, 1.0, 1.0) - want) < 1e-6);
        }
    }
    // s = 1.5: radial quadrature vs direct 2-d Fourier quadrature oracle
    const auto fourier_2d = [](double x0, double x1) {
        const auto outer = [&](double t0) {
            const auto inner = [&](double t1) {
                return std::cos(t0 * x0 + t1 * x1) *
                       std::exp(-std::pow(t0 * t0 + t1 * t1, 0.75));
            };
            return integrate_adaptive(inner, -12.0, 12.0, 1e-10);
        };
        return integrate_adaptive(outer, -12.0, 12.0, 1e-9) / (4.0 * M_PI * M_PI);
    };
    for (double r : {0.0, 0.8, 2.0}) {
        std::vector<double> x = {r, 0.0};
        CHECK(std::abs(stable_density(x, 2, 1.5, 1.0) - fourier_2d(r, 0.0)) < 1e-6);
    }
    CHECK_THROWS(stable_density(std::vector<double>{0.0}, 1, 0.2, 1.0));
}

TEST_CASE("fractional transition: closed form, symmetry, row sums") {
    auto fr1 = ModelSpec::fractional(1, 0.7, 1.0);
    // d=1 Cauchy closed form needs s=1, allowed for the density but not the
    // model; use the density directly for the anchor
    const double q00 = integrate_adaptive(
        [&](double x) {
            return stable_density(std::vector<double>{x}, 1, 1.0, 1.0);
        },
        -0.5, 0.5, 1e-12);
    CHECK(q00 == doctest::Approx(2.0 / M_PI * std::atan(0.5)).epsilon(1e-10));

    auto fr2 = ModelSpec::fractional(2, 1.0, 1.0);
    FractionalKernel kernel(fr2);
    // sign-flip symmetry: signed offsets equal the paper's absolute form
    CHECK(kernel.q_entry(Site{2, -3}) == kernel.q_entry(Site{2, 3}));
    CHECK(kernel.q_entry(Site{-2, 3}) == kernel.q_entry(Site{3, 2}));
    CHECK(fractional_transition(fr2, Site{4, 5}, Site{5, 5}) ==
          fractional_transition(fr2, Site{5, 5}, Site{4, 5}));

    // row sum with radial tail completion: sum over the cube [-L, L]^2 of Q
    // equals the radially computed cube mass; the remainder completes to 1
    const int R = 10;
    double cube_sum = 0;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j) cube_sum += kernel.q_entry(Site{i, j});
    const double inside = stable_cube_mass(R + 0.5, 2, 1.0, 1.0);
    CHECK(std::abs(cube_sum + (1.0 - inside) - 1.0) < 1e-4);
    // d=1 row sum via the Gil-Pelaez mass
    FractionalKernel k1(fr1);
    double row1 = 0;
    for (int i = -40; i <= 40; ++i) row1 += k1.q_entry(Site{i});
    const double inside1 = stable_cube_mass(40.5, 1, 0.7, 1.0);
    CHECK(std::abs(row1 + (1.0 - inside1) - 1.0) < 1e-4);
}

TEST_CASE("fractional infinite green: stability, decay, symmetry") {
    auto fr = ModelSpec::fractional(2, 1.0, 1.0);
    const auto col32 = fractional_green_column(fr, 32);
    const auto col64 = fractional_green_column(fr, 64);
    // box-doubling self-consistency: the truncation error shrinks like 1/R,
    // about 2% per unit offset at R=32 (measured; tightest near the origin)
    double prev_shift = 1.0;
    for (int r : {1, 2, 4}) {
        const double a = col32.at(Site{r, 0}), b = col64.at(Site{r, 0});
        const double shift = std::abs(a - b) / std::abs(b);
        CHECK(shift < 0.02 * r);
        CHECK(shift < 0.05);
        prev_shift = shift;
    }
    (void)prev_shift;
    // polynomial decay toward zero; the raw column is symmetric to solver
    // precision, the evaluator canonicalizes exactly
    CHECK(col64.at(Site{8, 0}) < col64.at(Site{2, 0}));
    CHECK(col64.at(Site{12, 0}) < col64.at(Site{6, 0}));
    CHECK(std::abs(col64.at(Site{-5, 3}) - col64.at(Site{5, 3})) < 1e-12);
    InfiniteGreenEvaluator eval(fr, 1e-11, 32);
    const double v = eval(Site{5, 3});
    CHECK(eval(Site{-5, 3}) == v);
    CHECK(eval(Site{3, -5}) == v);
    CHECK(eval(Site{-3, 5}) == v);
    CHECK_THROWS(fractional_green_infinite(fr, Site{10, 0}, 16));
}

TEST_CASE("kappa estimates") {
    auto k1 = kappa_estimate(ModelSpec::massive(1, 0.5), 8.0);
    const double g0 = 2.0 / std::sqrt(3.0), g1 = 2.0 * (2.0 / std::sqrt(3.0) - 1.0);
    CHECK(k1.kappa == doctest::Approx(1.0 - g1 / g0).epsilon(1e-9));
    CHECK(k1.tail_certified);
    CHECK(k1.kappa > 0.0);
    CHECK(k1.kappa <= 1.0);

    auto k3 = kappa_estimate(ModelSpec::dgff(3), 8.0);
    const double gamma0 = walk_green_infinite(ModelSpec::dgff(3), Site{0, 0, 0});
    CHECK(k3.kappa == doctest::Approx(1.0 / gamma0).epsilon(1e-9));
    CHECK(k3.argmax_offset == Site{1, 0, 0});
    CHECK(k3.tail_certified);
}

TEST_CASE("green decomposition identity on a finite instance") {
    // g_{theta,U}(a,b) = g_{theta,U u K}(a,b) + sum_K hit(gamma) g_{theta,U}(gamma,b)
    // exact matrix route: U = outside the interval [0, 20], K = {12}
    auto m = ModelSpec::massive(1, 0.4);
    std::vector<Site> interval;
    for (int i = 0; i <= 20; ++i) interval.push_back(Site{i});
    std::vector<Site> punctured;  // interval minus K
    for (int i = 0; i <= 20; ++i)
        if (i != 12) punctured.push_back(Site{i});
    const GreenMatrix gu = finite_green(m, interval);
    const GreenMatrix guk = finite_green(m, punctured);
    // hit distribution of K from a: h(gamma) = g_U(a, gamma)/g_U(gamma, gamma)
    // (one-point K: standard last-exit decomposition)
    const Site a{3}, b{17}, gamma{12};
    const auto ia = 3, ib = 17, ig = 12;
    const double h = gu.cov()(ia, ig) / gu.cov()(ig, ig);
    const auto pos = [&](int i) { return i < 12 ? i : i - 1; };
    CHECK(gu.cov()(ia, ib) ==
          doctest::Approx(guk.cov()(pos(ia), pos(ib)) + h * gu.cov()(ig, ib)).epsilon(1e-10));
}
