#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netlasso/error.hpp"
#include "netlasso/shrinkage.hpp"
#include "oracles.hpp"

using namespace netlasso;

TEST_CASE("main shrinkage closed form") {
    CHECK(main_shrinkage(0.5, 0.2, 1.0, 1.0, 0.0) * 0.5 == doctest::Approx(0.3));
    CHECK(main_shrinkage(-0.5, 0.2, 1.0, 1.0, 0.0) == doctest::Approx(0.6));
    CHECK(main_shrinkage(0.2, 0.2, 1.0, 1.0, 0.0) == 0.0);
    CHECK(main_shrinkage(0.1, 0.2, 1.0, 1.0, 0.0) == 0.0);
    CHECK(main_shrinkage(0.0, 0.2, 1.0, 1.0, 0.5) == 0.0);
}

TEST_CASE("main shrinkage with a nonzero group matches the grid oracle") {
    const double a = main_shrinkage(1.0, 0.5, 1.0, 1.0, 0.25);
    CHECK(std::abs(a - oracle::main_alpha(1.0, 0.5, 1.0, 1.0, 0.25)) < 1e-6);
    // entry threshold is zero once the group is active
    CHECK(main_shrinkage(1e-4, 0.5, 1.0, 1.0, 0.25) > 0.0);
}

TEST_CASE("interaction shrinkage closed form and lambda2 cut") {
    CHECK(interaction_shrinkage(1.0, 0.1, 0.05, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(0.75));
    CHECK(interaction_shrinkage(0.04, 0.1, 0.05, 1.0, 1.0, 0.3, 0.7) == 0.0);
    CHECK(interaction_shrinkage(0.05, 0.1, 0.05, 1.0, 1.0, 0.3, 0.7) == 0.0);
    const double a = interaction_shrinkage(1.0, 0.1, 0.05, 1.0, 1.0, 0.04, 0.09);
    CHECK(std::abs(a - oracle::interaction_alpha(1.0, 0.1, 0.05, 1.0, 1.0, 0.04, 0.09)) < 1e-6);
}

TEST_CASE("root finder agrees with a bisection oracle on random instances") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double b = (0.05 + 2.0 * u(rng)) * (u(rng) < 0.5 ? -1 : 1);
        const double l1 = 0.01 + 0.5 * u(rng);
        const double l2 = 0.5 * u(rng);
        const double w = 0.5 + 1.5 * u(rng);
        const double q = 0.001 + u(rng);
        const double c1 = u(rng) < 0.2 ? 0.0 : 0.5 * u(rng);
        const double c2 = u(rng) < 0.2 ? 0.0 : 0.5 * u(rng);
        const double B = std::abs(b);

        const double am = main_shrinkage(b, l1, w, q, c1);
        CHECK(am >= 0.0);
        CHECK(am <= 1.0);
        if (c1 > 0.0) {
            const double ref = oracle::bisect([&](double a) {
                return a * B + l1 * w * w * a * B / std::sqrt(w * w * q * a * a * B * B + c1) - B;
            });
            CHECK(std::abs(am - ref) < 1e-6);
        }

        const double ai = interaction_shrinkage(b, l1, l2, w, q, c1, c2);
        CHECK(ai >= 0.0);
        CHECK(ai <= 1.0);
        const double rhs = B - l2 * w / std::sqrt(q);
        auto term = [&](double a, double c) {
            return c == 0.0 ? 1.0 / (w * std::sqrt(q)) : a * B / std::sqrt(w * w * q * a * a * B * B + c);
        };
        const double ref = rhs <= 0.0 ? 0.0 : oracle::bisect([&](double a) {
            return a * B + l1 * w * w * (term(a, c1) + term(a, c2)) - rhs;
        });
        CHECK(std::abs(ai - ref) < 1e-6);
    }
}

TEST_CASE("root function is increasing in alpha") {
    // Sampled monotonicity of phi for the interaction equation.
    const double B = 0.8, l1 = 0.2, w = 1.3, q = 0.4, c1 = 0.05, c2 = 0.2;
    double prev = -1e300;
    for (int i = 1; i <= 1000; ++i) {
        const double a = i / 1000.0;
        const double s = w * w * q * a * a * B * B;
        const double v = a * B + l1 * w * w * (a * B / std::sqrt(s + c1) + a * B / std::sqrt(s + c2));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("non-finite inputs are rejected") {
    try {
        main_shrinkage(std::nan(""), 0.1, 1.0, 1.0, 0.0);
        FAIL("expected NonFiniteInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteInput);
    }
    CHECK_THROWS_AS(interaction_shrinkage(1.0, INFINITY, 0.0, 1.0, 1.0, 0.0, 0.0), Error);
}
