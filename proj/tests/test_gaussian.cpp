#include <doctest.h>

#include <cmath>
#include <vector>

#include "glx/gaussian.hpp"
#include "glx/rng.hpp"

using namespace glx;

namespace {

// killed massive walk on an interval domain; returns the first site of K hit,
// or -1 if the walk dies (rate theta) or leaves the interval first
int walk_until_hit(ReplicateRng& rng, double theta, int start, int lo, int hi,
                   const std::vector<int>& K) {
    int x = start;
    for (int step = 0; step < 100000; ++step) {
        for (int k : K)
            if (x == k) return x;
        if (rng.uniform() < theta) return -1;  // killed
        x += rng.uniform() < 0.5 ? -1 : 1;
        if (x < lo || x > hi) return -1;  // exits the domain
    }
    return -1;
}

}  // namespace

TEST_CASE("white noise sampling moments") {
    const int n = 32;
    const auto sampler = GaussianSampler::from_covariance(Eigen::MatrixXd::Identity(n, n));
    const int reps = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n), sumsq = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v;
    for (int r = 0; r < reps; ++r) {
        sampler.sample_into(11, r, v);
        sum += v;
        sumsq += v.cwiseProduct(v);
    }
    for (int i = 0; i < n; ++i) {
        const double mean = sum(i) / reps;
        const double var = sumsq(i) / reps - mean * mean;
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(var - 1.0) < 0.02);
    }
}

TEST_CASE("2x2 covariance reproduced; determinism; worker independence") {
    Eigen::Matrix2d cov;
    cov << 1.0, 0.5, 0.5, 1.0;
    const auto sampler = GaussianSampler::from_covariance(cov);
    const int reps = 100000;
    double sxy = 0, sxx = 0, syy = 0;
    Eigen::VectorXd v;
    for (int r = 0; r < reps; ++r) {
        sampler.sample_into(5, r, v);
        sxy += v(0) * v(1);
        sxx += v(0) * v(0);
        syy += v(1) * v(1);
    }
    CHECK(std::abs(sxy / std::sqrt(sxx * syy) - 0.5) < 0.01);

    Eigen::VectorXd a, b;
    sampler.sample_into(5, 123, a);
    sampler.sample_into(5, 123, b);
    CHECK(a == b);

    const auto batch1 = sampler.sample(64, 5, 1);
    const auto batch4 = sampler.sample(64, 5, 4);
    for (int i = 0; i < 64; ++i)
        CHECK(batch1[static_cast<std::size_t>(i)].values ==
              batch4[static_cast<std::size_t>(i)].values);
}

TEST_CASE("precision-route sampling matches covariance-route law") {
    // massive d1 interval: both factorizations target the same Gaussian
    auto model = ModelSpec::massive(1, 0.4);
    const BoxDomain box(1, 12);
    const auto sites = enumerate_box(1, 12);
    const auto sampler_prec = GaussianSampler::from_sparse_precision(sparse_precision(model, sites));
    const GreenMatrix g = finite_green(model, box);

    const int reps = 200000;
    Eigen::VectorXd v;
    Eigen::MatrixXd emp = Eigen::MatrixXd::Zero(12, 12);
    for (int r = 0; r < reps; ++r) {
        sampler_prec.sample_into(17, r, v);
        emp.noalias() += v * v.transpose();
    }
    emp /= reps;
    // covariance entries agree within Monte Carlo error (4.5 sigma margin)
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            const double se = std::sqrt((g.cov()(i, i) * g.cov()(j, j) +
                                         g.cov()(i, j) * g.cov()(i, j)) /
                                        reps);
            CHECK(std::abs(emp(i, j) - g.cov()(i, j)) < 4.5 * se);
        }
}

TEST_CASE("conditional weights: delta row, empty K, 2x2 Schur") {
    Eigen::Matrix2d cov;
    cov << 1.0, 0.5, 0.5, 1.0;
    Eigen::MatrixXd covx = cov;
    const auto w = conditional_weights(covx, {1}, 1);
    CHECK(w.size() == 1);
    CHECK(w(0) == 1.0);

    const auto empty = conditional_weights(covx, {}, 0);
    CHECK(empty.size() == 0);
    const auto dec0 = conditional_variances(covx, {}, 0);
    CHECK(dec0.var_mu == 0.0);
    CHECK(dec0.var_psi == doctest::Approx(1.0));

    const auto dec = conditional_variances(covx, {1}, 0);
    CHECK(dec.var_mu == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(dec.var_psi == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(dec.var_mu + dec.var_psi == doctest::Approx(dec.variance).epsilon(1e-12));
}

TEST_CASE("decomposition identity across models and domains") {
    struct Case {
        ModelSpec model;
        int n;
    };
    const std::vector<Case> cases = {{ModelSpec::dgff(3), 4},
                                     {ModelSpec::massive(2, 0.3), 5},
                                     {ModelSpec::membrane(5), 3},
                                     {ModelSpec::fractional(2, 1.0, 1.0), 5}};
    ReplicateRng pick(99, 0);
    for (const auto& c : cases) {
        const BoxDomain box(c.model.d, c.n);
        const GreenMatrix g = finite_green(c.model, box);
        for (int trial = 0; trial < 5; ++trial) {
            const auto alpha =
                static_cast<Eigen::Index>(pick.next_u64() % static_cast<std::uint64_t>(box.volume()));
            std::vector<Eigen::Index> K;
            for (Eigen::Index i = 0; i < box.volume(); ++i)
                if (i != alpha && pick.uniform() < 0.5) K.push_back(i);
            const auto dec = conditional_variances(g.cov(), K, alpha);
            CHECK(std::abs(dec.var_mu + dec.var_psi - dec.variance) <= 1e-10 * dec.variance);
            CHECK(dec.var_mu >= -1e-12);
            CHECK(dec.var_psi >= -1e-12);
        }
    }
}

TEST_CASE("mu and psi are empirically independent") {
    auto model = ModelSpec::massive(1, 0.4);
    const BoxDomain box(1, 16);
    const GreenMatrix g = finite_green(model, box);
    const auto sampler = GaussianSampler::from_covariance(g.cov());
    const Eigen::Index alpha = 8;
    std::vector<Eigen::Index> K;
    for (Eigen::Index i = 0; i < 16; ++i)
        if (std::abs(i - alpha) >= 3) K.push_back(i);
    const auto w = conditional_weights(g.cov(), K, alpha);

    const int reps = 100000;
    Eigen::VectorXd v;
    double s_mu = 0, s_psi = 0, s_mupsi = 0, s_mu2 = 0, s_psi2 = 0;
    for (int r = 0; r < reps; ++r) {
        sampler.sample_into(23, r, v);
        double mu = 0;
        for (std::size_t k = 0; k < K.size(); ++k)
            mu += w(static_cast<Eigen::Index>(k)) * v(K[k]);
        const double psi = v(alpha) - mu;
        s_mu += mu;
        s_psi += psi;
        s_mupsi += mu * psi;
        s_mu2 += mu * mu;
        s_psi2 += psi * psi;
    }
    const double cov_emp = s_mupsi / reps - (s_mu / reps) * (s_psi / reps);
    const double var_mu = s_mu2 / reps - (s_mu / reps) * (s_mu / reps);
    const double var_psi = s_psi2 / reps - (s_psi / reps) * (s_psi / reps);
    const double se = std::sqrt(var_mu * var_psi / reps);
    CHECK(std::abs(cov_emp) < 3 * se);
    // empirical variances agree with the decomposition
    const auto dec = conditional_variances(g.cov(), K, alpha);
    CHECK(std::abs(var_mu - dec.var_mu) < 0.02 * dec.variance);
    CHECK(std::abs(var_psi - dec.var_psi) < 0.02 * dec.variance);
}

TEST_CASE("T weights match the walk hitting distribution (massive, 1-d)") {
    // K = {alpha+2, ...} on one side: T(alpha, gamma) equals the probability
    // that the killed walk first enters K at gamma
    const double theta = 0.5;
    auto model = ModelSpec::massive(1, theta);
    const BoxDomain box(1, 32);
    const GreenMatrix g = finite_green(model, box);
    const Eigen::Index alpha = 8;
    std::vector<Eigen::Index> K;
    std::vector<int> Ksites;
    for (Eigen::Index i = alpha + 2; i < 32; ++i) {
        K.push_back(i);
        Ksites.push_back(static_cast<int>(i));
    }
    const auto w = conditional_weights(g.cov(), K, alpha);

    const int reps = 200000;
    std::vector<int> hits(K.size(), 0);
    ReplicateRng rng(31, 7);
    for (int r = 0; r < reps; ++r) {
        const int hit = walk_until_hit(rng, theta, static_cast<int>(alpha), 0, 31, Ksites);
        if (hit >= 0) ++hits[static_cast<std::size_t>(hit) - static_cast<std::size_t>(alpha + 2)];
    }
    for (std::size_t k = 0; k < K.size(); ++k) {
        const double p_hat = static_cast<double>(hits[k]) / reps;
        const double se = std::sqrt(std::max(p_hat * (1 - p_hat), 1e-9) / reps);
        CHECK(std::abs(p_hat - w(static_cast<Eigen::Index>(k))) < std::max(3 * se, 1e-4));
    }
}

TEST_CASE("green decomposition via Monte Carlo hit distribution") {
    // g_{theta,U}(a,b) = g_{theta,U u K}(a,b) + P[hit K at gamma] g_{theta,U}(gamma,b)
    const double theta = 0.4;
    auto model = ModelSpec::massive(1, theta);
    std::vector<Site> interval, punctured;
    for (int i = 0; i <= 20; ++i) {
        interval.push_back(Site{i});
        if (i != 12) punctured.push_back(Site{i});
    }
    const GreenMatrix gu = finite_green(model, interval);
    const GreenMatrix guk = finite_green(model, punctured);
    const int a = 6, b = 17, gamma = 12;
    const int reps = 200000;
    int hits = 0;
    ReplicateRng rng(41, 3);
    for (int r = 0; r < reps; ++r)
        if (walk_until_hit(rng, theta, a, 0, 20, {gamma}) == gamma) ++hits;
    const double h = static_cast<double>(hits) / reps;
    const double se = std::sqrt(h * (1 - h) / reps);
    const double lhs = gu.cov()(a, b);
    const double rhs = guk.cov()(a < gamma ? a : a - 1, b < gamma ? b : b - 1) +
                       h * gu.cov()(gamma, b);
    CHECK(std::abs(lhs - rhs) < 3 * se * gu.cov()(gamma, b));
}

TEST_CASE("membrane Markov property: Schur equals the ball BVP green") {
    // finite volume: conditioning the box field on everything outside the
    // ball leaves the membrane with 0-boundary outside the ball
    auto model = ModelSpec::membrane(5);
    const BoxDomain box(5, 5);
    const GreenMatrix g = finite_green(model, box);
    const Site center{2, 2, 2, 2, 2};
    const double radius = 1.6;
    const auto ball = ball_sites(center, radius, box);
    std::vector<Eigen::Index> K;
    {
        std::vector<bool> in_ball(static_cast<std::size_t>(box.volume()), false);
        for (const auto& s : ball) in_ball[static_cast<std::size_t>(box.index_of(s))] = true;
        for (Eigen::Index i = 0; i < box.volume(); ++i)
            if (!in_ball[static_cast<std::size_t>(i)]) K.push_back(i);
    }
    const auto dec = conditional_variances(g.cov(), K, box.index_of(center));
    const GreenMatrix ball_green = finite_green(model, ball);
    const auto pos = ball_green.position_of(center);
    REQUIRE(pos >= 0);
    CHECK(std::abs(dec.var_psi - ball_green.cov()(pos, pos)) < 1e-8);
    // same through the fast precision route
    const double var_psi_fast =
        residual_variance_from_precision(dense_precision(model, ball), pos);
    CHECK(std::abs(dec.var_psi - var_psi_fast) < 1e-10);
}

TEST_CASE("massive conditional mean variance decays exponentially in the gap") {
    // Var[mu_alpha] with K the complement of a radius-s ball: log-linear in s
    auto model = ModelSpec::massive(1, 0.5);
    const BoxDomain box(1, 64);
    const GreenMatrix g = finite_green(model, box);
    const Eigen::Index alpha = 32;
    std::vector<double> svals, logv;
    double prev = 1e9;
    for (int s : {2, 4, 6, 8, 10}) {
        std::vector<Eigen::Index> K;
        for (Eigen::Index i = 0; i < 64; ++i)
            if (std::abs(i - alpha) > s) K.push_back(i);
        const auto dec = conditional_variances(g.cov(), K, alpha);
        CHECK(dec.var_mu < prev);
        prev = dec.var_mu;
        if (dec.var_mu > 0) {
            svals.push_back(s);
            logv.push_back(std::log(dec.var_mu));
        }
    }
    // slope of log Var[mu] vs s is strictly negative
    const double n = static_cast<double>(svals.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < svals.size(); ++i) {
        sx += svals[i];
        sy += logv[i];
        sxx += svals[i] * svals[i];
        sxy += svals[i] * logv[i];
    }
    CHECK((n * sxy - sx * sy) / (n * sxx - sx * sx) < -0.5);
}

TEST_CASE("sparse precision sampler handles a membrane box") {
    auto model = ModelSpec::membrane(5);
    const BoxDomain box(5, 4);  // 1024 sites
    const auto sampler = GaussianSampler::for_model(model, box);
    Eigen::VectorXd v;
    sampler.sample_into(3, 0, v);
    CHECK(v.size() == 1024);
    CHECK(v.allFinite());
    // variance sanity at the center against the dense route
    const GreenMatrix g = finite_green(model, box);
    const Site c{2, 2, 2, 2, 2};
    double acc = 0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        sampler.sample_into(3, r, v);
        const double x = v(box.index_of(c));
        acc += x * x;
    }
    const double want = g.cov()(box.index_of(c), box.index_of(c));
    CHECK(std::abs(acc / reps - want) < 5 * want * std::sqrt(2.0 / reps));
}
