#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "workbench/common.hpp"
#include "workbench/em.hpp"
#include "workbench/prng.hpp"

#include <cmath>
#include <limits>

using namespace wb;

namespace {

SystemMatrix make_dense(int n_sources, int n_detectors, const std::vector<double>& row_major) {
    std::vector<SystemMatrix::Entry> entries;
    for (int d = 0; d < n_detectors; ++d) {
        for (int b = 0; b < n_sources; ++b) {
            const double w = row_major[static_cast<size_t>(d) * n_sources + b];
            if (w != 0.0) entries.push_back({b, d, w});
        }
    }
    return SystemMatrix(n_sources, n_detectors, entries);
}

Vec vec(std::initializer_list<double> vals) {
    Vec v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

// Independent oracle: brute-force scan of the Poisson log-likelihood over a
// 2-d grid of candidate rates.
struct GridOracle {
    Vec best;
    double best_ll;
};

GridOracle grid_search_2d(const SystemMatrix& A, const Vec& n, double lo, double hi,
                          double step) {
    GridOracle o{Vec::Zero(2), -std::numeric_limits<double>::infinity()};
    for (double a = lo; a <= hi; a += step) {
        for (double b = lo; b <= hi; b += step) {
            const Vec lambda = vec({a, b});
            const double ll = log_likelihood(lambda, A, n);
            if (ll > o.best_ll) {
                o.best_ll = ll;
                o.best = lambda;
            }
        }
    }
    return o;
}

const std::vector<double> k2x3 = {0.5, 0.0, 0.5, 0.5, 0.0, 0.5};  // detector-major rows

SystemMatrix make_2x3() { return make_dense(2, 3, k2x3); }

}  // namespace

TEST_CASE("system matrix rejects invisible sources and bad weights") {
    CHECK_THROWS_AS(SystemMatrix(2, 1, {{0, 0, 1.0}}), Error);  // source 1 unseen
    CHECK_THROWS_AS(SystemMatrix(1, 1, {{0, 0, -1.0}}), Error);
    CHECK_THROWS_AS(SystemMatrix(1, 1, {{0, 0, std::nan("")}}), Error);
    CHECK_THROWS_AS(SystemMatrix(1, 1, {{0, 2, 1.0}}), DimensionMismatch);
}

TEST_CASE("col_sums match recomputed per-source totals") {
    const auto A = make_2x3();
    CHECK(A.col_sums()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(A.col_sums()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("em_step 1x1 reaches the closed-form MLE in one step") {
    const auto A = make_dense(1, 1, {1.0});
    const Vec next = em_step(vec({2.0}), A, vec({5.0}));
    CHECK(next[0] == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("em_step fixed point on consistent identity data") {
    const auto A = make_dense(2, 2, {1.0, 0.0, 0.0, 1.0});
    const Vec next = em_step(vec({3.0, 7.0}), A, vec({3.0, 7.0}));
    CHECK(next[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(next[1] == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("em_step errors") {
    const auto A = make_dense(1, 1, {1.0});
    CHECK_THROWS_AS(em_step(vec({1.0, 2.0}), A, vec({1.0})), DimensionMismatch);
    CHECK_THROWS_AS(em_step(vec({0.0}), A, vec({3.0})), ZeroForwardProjection);
    // n_d = 0 with zero forward projection is fine.
    CHECK(em_step(vec({0.0}), A, vec({0.0}))[0] == 0.0);
}

TEST_CASE("log_likelihood closed forms") {
    const auto A = make_dense(1, 1, {1.0});
    CHECK(log_likelihood(vec({1.0}), A, vec({0.0})) == doctest::Approx(-1.0));
    CHECK(log_likelihood(vec({1.0}), A, vec({2.0})) == doctest::Approx(-1.0));
    CHECK(log_likelihood(vec({0.0}), A, vec({2.0})) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("kl_divergence basics and elementwise oracle") {
    CHECK(kl_divergence(vec({3.0, 7.0}), vec({3.0, 7.0})) == doctest::Approx(0.0));
    CHECK(kl_divergence(vec({0.0}), vec({2.0})) == doctest::Approx(2.0));

    SplitMix64Stream rng(1234);
    Vec n(5), m(5);
    for (int i = 0; i < 5; ++i) {
        n[i] = std::floor(rng.uniform01() * 10.0);
        m[i] = 0.1 + rng.uniform01() * 10.0;
    }
    double expected = 0.0;
    for (int i = 0; i < 5; ++i) {
        expected += (n[i] > 0 ? n[i] * std::log(n[i] / m[i]) - n[i] + m[i] : m[i]);
    }
    CHECK(kl_divergence(n, m) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("EM limit matches brute-force grid oracle on the 2x3 instance") {
    const auto A = make_2x3();
    const Vec n = vec({4.0, 6.0, 2.0});
    EmConfig cfg;
    cfg.max_iters = 20000;
    cfg.rel_ll_tol = 1e-14;
    const EmResult r = run_em(A, n, cfg);

    const GridOracle coarse = grid_search_2d(A, n, 0.0, 30.0, 0.1);
    const GridOracle fine = grid_search_2d(A, n, std::max(0.0, coarse.best[0] - 0.2),
                                           coarse.best[0] + 0.2, 1e-3);
    // Refine the second coordinate around the coarse optimum too.
    GridOracle best = fine;
    for (double b = std::max(0.0, coarse.best[1] - 0.2); b <= coarse.best[1] + 0.2; b += 1e-3) {
        for (double a = std::max(0.0, coarse.best[0] - 0.2); a <= coarse.best[0] + 0.2;
             a += 1e-3) {
            const Vec lambda = vec({a, b});
            const double ll = log_likelihood(lambda, A, n);
            if (ll > best.best_ll) {
                best.best_ll = ll;
                best.best = lambda;
            }
        }
    }
    CHECK(std::abs(r.rates[0] - best.best[0]) <= 1e-3);
    CHECK(std::abs(r.rates[1] - best.best[1]) <= 1e-3);
    CHECK(r.trace.back() == doctest::Approx(best.best_ll).epsilon(1e-6));
}

TEST_CASE("run_em zero counts collapse to zero rates") {
    const auto A = make_2x3();
    EmConfig cfg;
    const EmResult r = run_em(A, vec({0.0, 0.0, 0.0}), cfg);
    CHECK(r.rates.maxCoeff() == 0.0);
    for (double ll : r.trace) CHECK(ll == 0.0);
}

TEST_CASE("run_em converges fast on the 1x1 instance") {
    const auto A = make_dense(1, 1, {1.0});
    EmConfig cfg;
    const EmResult r = run_em(A, vec({5.0}), cfg);
    CHECK(r.rates[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.iterations <= 2);
}

TEST_CASE("monotonicity, conservation, absorbing zeros on random instances") {
    SplitMix64Stream rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int n_src = 2 + static_cast<int>(rng.uniform01() * 3);
        const int n_det = 2 + static_cast<int>(rng.uniform01() * 4);
        std::vector<double> weights(static_cast<size_t>(n_src) * n_det);
        for (auto& w : weights) w = rng.uniform01();
        const auto A = make_dense(n_src, n_det, weights);
        Vec lambda(n_src), counts(n_det);
        for (int b = 0; b < n_src; ++b) lambda[b] = rng.uniform01() * 5.0;
        lambda[0] = 0.0;  // exercise the absorbing-zero path
        for (int d = 0; d < n_det; ++d) counts[d] = std::floor(rng.uniform01() * 20.0);

        const double ll0 = log_likelihood(lambda, A, counts);
        const Vec next = em_step(lambda, A, counts);
        const double ll1 = log_likelihood(next, A, counts);
        CHECK(ll1 >= ll0 - 1e-10 * std::abs(ll0));
        CHECK(next.minCoeff() >= 0.0);
        CHECK(next[0] == 0.0);
        const double total_fwd = A.forward(next).sum();
        const double total_counts = counts.sum();
        if (total_counts > 0) {
            CHECK(total_fwd == doctest::Approx(total_counts).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact data with positive rates is a fixed point") {
    SplitMix64Stream rng(7);
    std::vector<double> weights(6);
    for (auto& w : weights) w = 0.2 + rng.uniform01();
    const auto A = make_dense(2, 3, weights);
    const Vec lambda = vec({2.0, 5.0});
    const Vec counts = A.forward(lambda);  // not integral, but em_step does not care
    const Vec next = em_step(lambda, A, counts);
    CHECK((next - lambda).cwiseAbs().maxCoeff() <= 1e-12 * lambda.maxCoeff());
}

TEST_CASE("run_em recovers from an infeasible start") {
    const auto A = make_dense(2, 2, {1.0, 0.0, 0.0, 1.0});
    EmConfig cfg;
    cfg.init = vec({0.0, 1.0});
    // Detector 0 has counts but zero projection under the init.
    CHECK_THROWS_AS(run_em(A, vec({3.0, 7.0}), cfg), ZeroForwardProjection);
    cfg.init.reset();
    const EmResult r = run_em(A, vec({3.0, 7.0}), cfg);
    CHECK(r.rates[0] == doctest::Approx(3.0).epsilon(1e-10));
}
