#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "glx/lattice.hpp"
#include "glx/model.hpp"

using namespace glx;

namespace {

// brute-force bulk: scan a generous exterior margin and check every site
std::set<Site> bulk_brute_force(const BoxDomain& box) {
    const double thr = box.bulk_threshold();
    std::set<Site> out;
    for (std::int64_t i = 0; i < box.volume(); ++i) {
        const Site s = box.site_at(i);
        double best = std::numeric_limits<double>::infinity();
        const int margin = static_cast<int>(std::ceil(thr)) + 2;
        Site g = s;
        const std::function<void(int)> rec = [&](int pos) {
            if (pos == box.d) {
                if (!box.contains(g)) best = std::min(best, std::sqrt(dist2(g, s)));
                return;
            }
            for (int v = s[pos] - margin; v <= s[pos] + margin; ++v) {
                g[pos] = v;
                rec(pos + 1);
            }
            g[pos] = s[pos];
        };
        rec(0);
        if (best > thr) out.insert(s);
    }
    return out;
}

}  // namespace

TEST_CASE("enumerate_box counts and order") {
    auto s = enumerate_box(2, 3);
    REQUIRE(s.size() == 9);
    CHECK(s.front() == Site{0, 0});
    CHECK(s[1] == Site{0, 1});  // row-major, first coordinate slowest
    CHECK(s.back() == Site{2, 2});
    CHECK(enumerate_box(1, 1) == std::vector<Site>{Site{0}});
    CHECK(enumerate_box(3, 4).size() == 64);
    for (std::size_t i = 0; i < s.size(); ++i) {
        BoxDomain box(2, 3);
        CHECK(box.index_of(s[i]) == static_cast<std::int64_t>(i));
        CHECK(box.site_at(static_cast<std::int64_t>(i)) == s[i]);
    }
    CHECK_THROWS(BoxDomain(8, 100000));  // n^d overflows the index
}

TEST_CASE("bulk sites match the definition") {
    // d=1, n=10, delta=0.2: nearest exterior sites are -1 and 10, threshold 2
    BoxDomain box(1, 10, 0.2);
    auto bulk = bulk_sites(box);
    std::vector<Site> want;
    for (int c = 2; c <= 7; ++c) want.push_back(Site{c});
    CHECK(bulk == want);

    CHECK(bulk_sites(BoxDomain(1, 10, 0.0)).size() == 10);

    BoxDomain b2(2, 4, 0.49);
    auto got = bulk_sites(b2);
    auto brute = bulk_brute_force(b2);
    CHECK(std::set<Site>(got.begin(), got.end()) == brute);
}

TEST_CASE("bulk monotone in delta and density limit") {
    for (int d : {1, 2}) {
        const int n = 64;
        std::set<Site> prev;
        bool first = true;
        for (double delta : {0.05, 0.1, 0.2, 0.3}) {
            BoxDomain box(d, n, delta);
            auto b = bulk_sites(box);
            std::set<Site> cur(b.begin(), b.end());
            if (!first)
                for (const auto& s : cur) CHECK(prev.count(s) == 1);
            prev = cur;
            first = false;
        }
    }
    // density |bulk|/N -> (1-2delta)^d; the integer rounding bias scales like
    // d/(n(1-2delta)), so the 5% window needs larger boxes for larger delta
    const auto density_gap = [](int d, int n, double delta) {
        BoxDomain box(d, n, delta);
        const double frac = static_cast<double>(bulk_indices(box).size()) / box.volume();
        const double want = std::pow(1.0 - 2.0 * delta, d);
        return std::abs(frac - want) / want;
    };
    for (int d : {1, 2}) {
        for (double delta : {0.05, 0.1}) CHECK(density_gap(d, 64, delta) < 0.05);
        for (double delta : {0.2, 0.3}) {
            CHECK(density_gap(d, 256, delta) < 0.05);
            CHECK(density_gap(d, 256, delta) <= density_gap(d, 64, delta));
        }
    }
}

TEST_CASE("ball sites") {
    BoxDomain box(2, 11);
    auto b = ball_sites(Site{5, 5}, 1.0, box);
    CHECK(b.size() == 5);
    CHECK(ball_sites(Site{5, 5}, 0.0, box) == std::vector<Site>{Site{5, 5}});
    // corner ball radius 1.5: brute-force scan of the box
    auto corner = ball_sites(Site{0, 0}, 1.5, box);
    std::set<Site> brute;
    for (std::int64_t i = 0; i < box.volume(); ++i) {
        const Site s = box.site_at(i);
        if (dist2(s, Site{0, 0}) <= 1.5 * 1.5) brute.insert(s);
    }
    CHECK(std::set<Site>(corner.begin(), corner.end()) == brute);
    CHECK(corner.size() == 4);  // (0,0),(0,1),(1,0),(1,1)
}

TEST_CASE("ball symmetry") {
    BoxDomain box(2, 9);
    for (double r : {1.0, 2.5, 3.3}) {
        for (std::int64_t i = 0; i < box.volume(); i += 7) {
            const Site a = box.site_at(i);
            for (const auto& b : ball_sites(a, r, box)) {
                auto back = ball_sites(b, r, box);
                CHECK(std::find(back.begin(), back.end(), a) != back.end());
            }
        }
    }
}

TEST_CASE("outer boundary within distance 2") {
    auto b1 = outer_boundary2(BoxDomain(1, 10));
    CHECK(std::set<Site>(b1.begin(), b1.end()) ==
          std::set<Site>{Site{-2}, Site{-1}, Site{10}, Site{11}});
    auto b2 = outer_boundary2(BoxDomain(1, 1));
    CHECK(std::set<Site>(b2.begin(), b2.end()) ==
          std::set<Site>{Site{-2}, Site{-1}, Site{1}, Site{2}});

    BoxDomain box(2, 2);
    auto b3 = outer_boundary2(box);
    for (const auto& s : b3) {
        CHECK(!box.contains(s));
        double best = 1e9;
        for (std::int64_t i = 0; i < box.volume(); ++i)
            best = std::min(best, dist2(s, box.site_at(i)));
        CHECK(best <= 4.0 + 1e-12);
    }
    // every exterior site within distance 2 is present (brute scan)
    int count = 0;
    for (int x = -3; x <= 4; ++x)
        for (int y = -3; y <= 4; ++y) {
            const Site s{x, y};
            if (box.contains(s)) continue;
            double best = 1e9;
            for (std::int64_t i = 0; i < box.volume(); ++i)
                best = std::min(best, dist2(s, box.site_at(i)));
            if (best <= 4.0) ++count;
        }
    CHECK(count == static_cast<int>(b3.size()));
}

TEST_CASE("dependency radius policies") {
    const double N = std::exp(10.0);
    auto massive = ModelSpec::massive(1, 0.5);
    CHECK(dependency_radius(DependencyRadiusPolicy::defaults_for(massive), massive, N) ==
          doctest::Approx(10.0));

    auto mem = ModelSpec::membrane(5);
    DependencyRadiusPolicy pol = DependencyRadiusPolicy::defaults_for(mem, 1.0);
    pol.T = 3.01;
    CHECK(dependency_radius(pol, mem, N) == doctest::Approx(std::pow(10.0, 3.01)).epsilon(1e-12));

    auto fr = ModelSpec::fractional(2, 1.0);
    DependencyRadiusPolicy pf = DependencyRadiusPolicy::defaults_for(fr);
    pf.xi = 2.5;
    CHECK(dependency_radius(pf, fr, N) == doctest::Approx(std::pow(10.0, 2.5)).epsilon(1e-12));

    auto mem4 = ModelSpec::membrane(4);
    CHECK_THROWS(dependency_radius(DependencyRadiusPolicy{ModelKind::Membrane, 3.01, 0, 1.0}, mem4, N));
    auto frbad = ModelSpec::fractional(2, 1.0);
    frbad.stable_index = 2.5;  // s >= d rejected by the policy
    frbad.d = 2;
    CHECK_THROWS(dependency_radius(DependencyRadiusPolicy{ModelKind::FractionalGff, 0, 2.5, 1.0},
                                   frbad, N));
}

TEST_CASE("exterior distance shortcut agrees with brute force") {
    BoxDomain box(2, 7, 0.2);
    for (std::int64_t i = 0; i < box.volume(); ++i) {
        const Site s = box.site_at(i);
        double brute = 1e18;
        for (int x = -4; x <= 10; ++x)
            for (int y = -4; y <= 10; ++y) {
                const Site g{x, y};
                if (!box.contains(g)) brute = std::min(brute, std::sqrt(dist2(g, s)));
            }
        CHECK(box.exterior_distance(s) == doctest::Approx(brute));
    }
}
