#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "netlasso/stats.hpp"

using namespace netlasso;

TEST_CASE("normal distribution helpers") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(z_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(z_two_sided_p(-1.959963984540054) == doctest::Approx(0.05).epsilon(1e-10));
    for (double p : {1e-12, 0.01, 0.3, 0.5, 0.77, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p));
}

TEST_CASE("t distribution p-values") {
    // t_{10, 0.975} = 2.228138851986
    CHECK(t_two_sided_p(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-8));
    CHECK(t_two_sided_p(0.0, 5) == doctest::Approx(1.0));
    CHECK(t_two_sided_p(std::numeric_limits<double>::infinity(), 5) == 0.0);
    // large df approaches the normal
    CHECK(t_two_sided_p(1.96, 1e7) == doctest::Approx(z_two_sided_p(1.96)).epsilon(1e-5));
}

TEST_CASE("bonferroni and signed z conversions") {
    CHECK(bonferroni(0.01, 3) == doctest::Approx(0.03));
    CHECK(bonferroni(0.5, 3) == 1.0);
    CHECK(bonferroni(0.2, 1) == doctest::Approx(0.2));
    CHECK(signed_z_from_p(0.05, -1.0) == doctest::Approx(-1.959963984540054));
    CHECK(signed_z_from_p(1.0, 1.0) == 0.0);
    CHECK(std::isfinite(signed_z_from_p(0.0, 1.0)));
    CHECK(signed_z_from_p(0.0, 1.0) > 30.0);
    // round trip with m = 1 is the identity
    for (double z : {-3.0, -0.5, 0.7, 2.5}) CHECK(bonferroni_round_trip(z, 1) == doctest::Approx(z).epsilon(1e-10));
    const double z = bonferroni_round_trip(3.0, 10);
    CHECK(z == doctest::Approx(normal_quantile(1.0 - bonferroni(z_two_sided_p(3.0), 10) / 2.0)));
    CHECK(bonferroni_round_trip(-1.0, 10) == 0.0);
    CHECK(bonferroni_round_trip(-4.0, 10) < 0.0);
}

TEST_CASE("log-scale tails extend past double underflow") {
    // continuous across the switch to the asymptotic forms
    for (double z : {5.0, 20.0, 37.0, 37.5, 38.0, 40.0, 60.0, 200.0}) {
        CHECK(signed_z_from_log_p(z_two_sided_log_p(z), 1.0) == doctest::Approx(z).epsilon(1e-9));
    }
    CHECK(z_two_sided_log_p(38.5) < z_two_sided_log_p(38.0));
    CHECK(z_two_sided_log_p(10.0) == doctest::Approx(std::log(z_two_sided_p(10.0))));
    // t tail: exact region vs Laplace approximation near the switch
    const double df = 500.0;
    double prev = 0.0;
    for (double t = 20.0; t <= 80.0; t += 0.5) {
        const double lp = t_two_sided_log_p(t, df);
        CHECK(lp < prev);
        prev = lp;
    }
    CHECK(t_two_sided_log_p(8.0, df) == doctest::Approx(std::log(t_two_sided_p(8.0, df))));
    // Bonferroni never increases |Z|, even in the far tail
    for (double z : {3.0, 30.0, 45.0, 90.0}) {
        CHECK(bonferroni_round_trip(z, 40) < z);
        CHECK(bonferroni_round_trip(-z, 40) > -z);
    }
    CHECK(bonferroni_log(-1.0, 10) == 0.0);
}

TEST_CASE("seed mixing is deterministic and spreads") {
    CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 100; ++a) {
        for (std::uint64_t b = 0; b < 10; ++b) seen.insert(mix_seed(42, a, b));
    }
    CHECK(seen.size() == 1000);
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); }, 4);
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(
                        50, [](std::size_t i) { if (i == 17) throw std::runtime_error("boom"); }, 3),
                    std::runtime_error);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}
