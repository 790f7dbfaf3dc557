#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "netlasso/cd_solver.hpp"
#include "netlasso/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace netlasso;

namespace {

// Objective recomputed term by term with explicit loops.
double naive_objective(const StandardizedDesign& sd, const WeightMatrix& w, double l1, double l2,
                       const CoefficientState& b) {
    const int n = sd.n(), p = sd.p();
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double fit = 0.0;
        for (const auto& [t, v] : b) {
            fit += t.is_main() ? sd.x(i, t.first()) * v : sd.x(i, t.first()) * sd.x(i, t.second()) * v;
        }
        r[static_cast<std::size_t>(i)] = sd.y(i) - fit;
    }
    double rss = 0.0;
    for (double v : r) rss += v * v;
    auto pair_norm2 = [&](int j, int k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::pow(sd.x(i, j) * sd.x(i, k), 2);
        return s;
    };
    double group = 0.0, lasso = 0.0;
    for (int j = 0; j < p; ++j) {
        double s = 0.0;
        const double bj = b.get(TermId::Main(j));
        if (bj != 0.0) s += w.diag(j) * w.diag(j) * sd.x.col(j).squaredNorm() * bj * bj;
        for (int k = 0; k < p; ++k) {
            if (k == j) continue;
            const double bjk = b.get(TermId::Inter(j, k));
            if (bjk == 0.0) continue;
            const double wt = w.weight(j, k);
            s += wt * wt * pair_norm2(j, k) * bjk * bjk;
            if (j < k) lasso += wt * std::sqrt(pair_norm2(j, k)) * std::abs(bjk);
        }
        group += std::sqrt(s);
    }
    return 0.5 * rss + l1 * group + l2 * lasso;
}

// Trait driven by two main effects and one interaction on the raw dosages.
Dataset planted(int n, int p, std::uint64_t seed) {
    Dataset ds = testsupport::random_dataset(n, p, seed);
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> e(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        ds.y[i] = 0.6 * ds.x(i, 0) - 0.5 * ds.x(i, 3) + 0.8 * (ds.x(i, 1) - 1.0) * (ds.x(i, 2) - 1.0) + e(rng);
    }
    return ds;
}

}  // namespace

TEST_CASE("objective of the empty model is half the unit trait norm") {
    const auto sd = standardize(testsupport::random_dataset(50, 6, 1));
    const auto w = testsupport::clique_weights(6, 6);
    SolverConfig cfg;
    CHECK(objective(sd, w, cfg, CoefficientState{}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("objective matches a naive re-evaluation") {
    const auto sd = standardize(testsupport::random_dataset(40, 8, 2));
    const auto w = testsupport::clique_weights(8, 5, 6, 3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        CoefficientState b;
        for (int j = 0; j < 8; ++j) {
            if (g(rng) > 0.0) b.set(TermId::Main(j), g(rng));
        }
        for (const auto& pr : w.pairs()) {
            if (g(rng) > 0.3) b.set(TermId::Inter(pr.j, pr.k), 3.0 * g(rng));
        }
        SolverConfig cfg;
        cfg.lambda1 = 0.07;
        cfg.lambda2 = 0.02;
        CHECK(objective(sd, w, cfg, b) == doctest::Approx(naive_objective(sd, w, 0.07, 0.02, b)).epsilon(1e-10));
    }
}

TEST_CASE("objective rejects a coefficient on an excluded pair") {
    const auto sd = standardize(testsupport::random_dataset(30, 4, 3));
    const auto w = testsupport::clique_weights(4, 2);
    CoefficientState b;
    b.set(TermId::Inter(2, 3), 1.0);
    CHECK_THROWS_AS(objective(sd, w, SolverConfig{}, b), Error);
}

TEST_CASE("partial residual adds back exactly one contribution") {
    const auto sd = standardize(testsupport::random_dataset(30, 5, 4));
    CoefficientState b;
    b.set(TermId::Main(0), 0.3);
    b.set(TermId::Main(2), -0.2);
    b.set(TermId::Inter(1, 4), 2.0);
    const Vector full = sd.y - 0.3 * sd.x.col(0) + 0.2 * sd.x.col(2) - 2.0 * interaction_column(sd, 1, 4);
    CHECK((partial_residual(sd, b, TermId::Main(0)) - (full + 0.3 * sd.x.col(0))).norm() < 1e-12);
    CHECK((partial_residual(sd, b, TermId::Inter(1, 4)) - (full + 2.0 * interaction_column(sd, 1, 4))).norm() <
          1e-12);
    CHECK((partial_residual(sd, b, TermId::Main(3)) - full).norm() < 1e-12);
}

TEST_CASE("very large lambda gives the empty model") {
    const auto sd = standardize(planted(100, 10, 5));
    const auto w = testsupport::clique_weights(10, 10);
    SolverConfig cfg;
    cfg.lambda1 = 10.0;
    const auto sol = fit(sd, w, cfg);
    CHECK(sol.coeffs.empty());
    CHECK(sol.converged);
    CHECK(sol.objective == doctest::Approx(0.5));
}

TEST_CASE("vanishing lambda recovers least squares") {
    const auto sd = standardize(planted(200, 5, 6));
    const WeightMatrix w(std::vector<double>(5, 1.0), {});
    SolverConfig cfg;
    cfg.lambda1 = 1e-9;
    cfg.tol = 1e-13;
    cfg.max_cycles = 100000;
    const auto sol = fit(sd, w, cfg);
    REQUIRE(sol.converged);
    const auto [beta, se] = oracle::normal_equations(sd.x, sd.y);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(sol.coeffs.get(TermId::Main(j)) - beta[j]) < 1e-6);
}

TEST_CASE("every accepted update lowers the objective") {
    const auto sd = standardize(planted(120, 12, 7));
    const auto w = testsupport::clique_weights(12, 6, 8, 9);
    SolverConfig cfg;
    cfg.lambda1 = 0.03;
    cfg.lambda2 = 0.01;
    CoefficientState cur;
    double prev = naive_objective(sd, w, cfg.lambda1, cfg.lambda2, cur);
    int updates = 0, increases = 0;
    FitOptions opts;
    opts.on_update = [&](const TermId& t, double, double v) {
        cur.set(t, v);
        const double now = naive_objective(sd, w, cfg.lambda1, cfg.lambda2, cur);
        if (now > prev + 1e-12) ++increases;
        prev = now;
        ++updates;
    };
    opts.on_block_update = [&](const std::vector<std::pair<TermId, double>>& moved) {
        for (const auto& [t, v] : moved) cur.set(t, v);
        const double now = naive_objective(sd, w, cfg.lambda1, cfg.lambda2, cur);
        if (now > prev + 1e-12) ++increases;
        prev = now;
        ++updates;
    };
    const auto sol = fit(sd, w, cfg, opts);
    CHECK(updates > 0);
    CHECK(increases == 0);
    CHECK(sol.objective == doctest::Approx(prev).epsilon(1e-10));
}

TEST_CASE("converged solution is a coordinatewise fixed point") {
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const auto sd = standardize(planted(150, 15, seed));
        const auto w = testsupport::clique_weights(15, 8, 10, seed);
        SolverConfig cfg;
        cfg.lambda1 = 0.02;
        cfg.lambda2 = 0.005;
        cfg.tol = 1e-12;
        cfg.max_cycles = 100000;
        const auto sol = fit(sd, w, cfg);
        REQUIRE(sol.converged);
        CHECK(sol.coeffs.interaction_count() > 0);
        for (int j = 0; j < 15; ++j) {
            CHECK(std::abs(shrink_main(sd, w, cfg, sol.coeffs, j) - sol.coeffs.get(TermId::Main(j))) < 1e-8);
        }
        for (const auto& pr : w.pairs()) {
            CHECK(std::abs(shrink_interaction(sd, w, cfg, sol.coeffs, pr.j, pr.k) -
                           sol.coeffs.get(TermId::Inter(pr.j, pr.k))) < 1e-7);
        }
    }
}

TEST_CASE("random update order reaches the same solution") {
    const auto sd = standardize(planted(150, 12, 21));
    const auto w = testsupport::clique_weights(12, 6, 6, 4);
    SolverConfig cfg;
    cfg.lambda1 = 0.02;
    cfg.lambda2 = 0.005;
    cfg.tol = 1e-12;
    cfg.max_cycles = 100000;
    const auto a = fit(sd, w, cfg);
    cfg.randomize_order = true;
    cfg.order_seed = 99;
    const auto b = fit(sd, w, cfg);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-10));
    for (const auto& [t, v] : a.coeffs) CHECK(std::abs(b.coeffs.get(t) - v) < 1e-5);
    for (const auto& [t, v] : b.coeffs) CHECK(std::abs(a.coeffs.get(t) - v) < 1e-5);
}

TEST_CASE("excluded terms stay at zero") {
    const auto sd = standardize(planted(150, 8, 22));
    std::vector<double> diag(8, 1.0);
    diag[0] = std::numeric_limits<double>::infinity();
    // pair (1, 2) carries the planted signal but is not allowed
    const WeightMatrix w(diag, {{0, 1, 1.0}, {3, 4, 1.0}, {5, 6, 1.0}});
    SolverConfig cfg;
    cfg.lambda1 = 0.01;
    const auto sol = fit(sd, w, cfg);
    CHECK(sol.coeffs.get(TermId::Main(0)) == 0.0);
    CHECK(sol.coeffs.get(TermId::Inter(1, 2)) == 0.0);
    for (const auto& [t, v] : sol.coeffs) {
        if (t.is_interaction()) CHECK(w.pair_index(t.first(), t.second()) >= 0);
    }
}

TEST_CASE("warm start and mask handling") {
    const auto sd = standardize(planted(100, 8, 23));
    const auto w = testsupport::clique_weights(8, 4);
    SolverConfig cfg;
    cfg.lambda1 = 0.02;
    const auto cold = fit(sd, w, cfg);

    FitOptions warm;
    warm.warm_start = &cold.coeffs;
    const auto again = fit(sd, w, cfg, warm);
    CHECK(again.cycles_used <= 2);
    CHECK(again.objective == doctest::Approx(cold.objective).epsilon(1e-9));

    CoefficientState bad;
    bad.set(TermId::Inter(5, 6), 1.0);
    FitOptions bad_opts;
    bad_opts.warm_start = &bad;
    CHECK_THROWS_AS(fit(sd, w, cfg, bad_opts), Error);

    std::vector<char> mask(8, 0);
    mask[0] = mask[3] = 1;
    FitOptions masked;
    masked.snp_mask = &mask;
    const auto m = fit(sd, w, cfg, masked);
    for (const auto& [t, v] : m.coeffs) {
        CHECK(mask[static_cast<std::size_t>(t.first())]);
        if (t.is_interaction()) CHECK(mask[static_cast<std::size_t>(t.second())]);
    }
}

TEST_CASE("solver configuration validation") {
    SolverConfig cfg;
    cfg.lambda1 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.lambda1 = 0.1;
    cfg.lambda2 = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.lambda2 = 0.0;
    cfg.max_cycles = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
