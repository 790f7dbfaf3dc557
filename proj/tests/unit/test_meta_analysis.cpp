#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netlasso/error.hpp"
#include "netlasso/meta_analysis.hpp"
#include "netlasso/stats.hpp"
#include "support.hpp"

using namespace netlasso;

namespace {

CohortSet cohorts(int M, int n, int p, std::uint64_t seed) {
    CohortSet cs;
    for (int m = 0; m < M; ++m) {
        Dataset ds = testsupport::random_dataset(n, p, seed + static_cast<std::uint64_t>(m));
        std::mt19937_64 rng(seed * 13 + static_cast<std::uint64_t>(m));
        std::normal_distribution<double> e(0.0, 1.0);
        for (int i = 0; i < n; ++i) ds.y[i] = 0.5 * ds.x(i, 1) + 0.4 * (ds.x(i, 2) - 1) * (ds.x(i, 3) - 1) + e(rng);
        cs.cohorts.push_back(std::move(ds));
        cs.labels.push_back("c" + std::to_string(m));
    }
    return cs;
}

TuneSpec spec_for(int s) {
    TuneSpec spec;
    spec.s_target = s;
    spec.s_slack = 1;
    spec.c = 0.5;
    spec.accept_closest = true;
    return spec;
}

}  // namespace

TEST_CASE("Stouffer combination") {
    Matrix z(2, 2);
    z << 1, 2, 3, -2;
    const Vector c = combine_stouffer(z);
    CHECK(c[0] == doctest::Approx(4.0 / std::sqrt(2.0)));
    CHECK(c[1] == doctest::Approx(0.0));
    CHECK_THROWS_AS(combine_stouffer(Matrix(0, 3)), Error);
}

TEST_CASE("inverse-variance combination") {
    Matrix b(2, 2), s(2, 2);
    b << 1, 5, 3, 7;
    s << 1, 0.5, 2, 0.5;
    const auto r = combine_inverse_variance(b, s);
    CHECK(r.beta[0] == doctest::Approx(1.4));
    CHECK(r.se[0] == doctest::Approx(1.0 / std::sqrt(1.25)));
    // equal standard errors reduce to the plain mean
    CHECK(r.beta[1] == doctest::Approx(6.0));
    CHECK(r.se[1] == doctest::Approx(0.5 / std::sqrt(2.0)));
    s(0, 0) = 0.0;
    try {
        combine_inverse_variance(b, s);
        FAIL("expected NonPositiveSE");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveSE);
    }
}

TEST_CASE("procedure A with K = 1 is a single split") {
    const auto cs = cohorts(1, 200, 20, 1);
    const auto w = testsupport::clique_weights(20, 6);
    const auto res = run_procedure_a(cs.cohorts[0], w, spec_for(3), 1, 17);
    const auto one = split_half_z(cs.cohorts[0], w, spec_for(3), mix_seed(17, 0));
    CHECK(res.K == 1);
    CHECK(res.terms.size() == one.z.size());
    for (const auto& [t, z] : one.z) CHECK(res.z(t) == doctest::Approx(z));
}

TEST_CASE("procedures are deterministic and thread-count independent") {
    const auto cs = cohorts(4, 120, 20, 2);
    const auto w = testsupport::clique_weights(20, 6);
    MetaOptions one, four;
    four.threads = 4;
    for (char proc : {'A', 'B', 'C', 'D'}) {
        auto run = [&](const MetaOptions& o) {
            switch (proc) {
                case 'A': return run_procedure_a(pool_cohorts(cs), w, spec_for(3), 4, 5, o);
                case 'B': return run_procedure_b(cs, w, spec_for(3), 4, 5, o);
                case 'C': return run_procedure_c(cs, w, spec_for(3), 4, 5, o);
                default: return run_procedure_d(cs, w, spec_for(3), 4, 5, o);
            }
        };
        const auto a = run(one);
        const auto b = run(four);
        CHECK(a.procedure == proc);
        REQUIRE(a.terms.size() == b.terms.size());
        for (const auto& [t, mt] : a.terms) {
            CHECK(b.z(t) == mt.z);
            CHECK(b.terms.at(t).n_splits_selected == mt.n_splits_selected);
        }
    }
}

TEST_CASE("strong signal survives every procedure") {
    const auto cs = cohorts(4, 200, 20, 3);
    const auto w = testsupport::clique_weights(20, 6);
    const auto a = run_procedure_a(pool_cohorts(cs), w, spec_for(3), 3, 9);
    const auto b = run_procedure_b(cs, w, spec_for(3), 3, 9);
    const auto c = run_procedure_c(cs, w, spec_for(3), 3, 9);
    const auto d = run_procedure_d(cs, w, spec_for(3), 3, 9);
    for (const auto* r : {&a, &b, &c, &d}) CHECK(r->z(TermId::Main(1)) > 2.0);
    // B and D report pooled effect sizes, A and C do not
    REQUIRE(b.terms.count(TermId::Main(1)) == 1);
    CHECK(b.terms.at(TermId::Main(1)).beta.has_value());
    CHECK(*b.terms.at(TermId::Main(1)).se > 0.0);
    CHECK_FALSE(c.terms.at(TermId::Main(1)).beta.has_value());
    CHECK(d.terms.at(TermId::Main(1)).n_splits_selected <= 3);
}

TEST_CASE("degenerate inputs") {
    const auto cs1 = cohorts(1, 100, 10, 4);
    const auto w = testsupport::clique_weights(10, 4);
    CHECK_THROWS_AS(run_procedure_b(cs1, w, spec_for(2), 2, 1), Error);
    CHECK_NOTHROW(run_procedure_d(cs1, w, spec_for(2), 2, 1));
    CHECK_THROWS_AS(run_procedure_a(cs1.cohorts[0], w, spec_for(2), 0, 1), Error);

    auto bad = cohorts(2, 50, 10, 5);
    bad.cohorts[1].snp_ids[0] = "other";
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(CohortSet{}.validate(), Error);

    const auto pooled = pool_cohorts(cohorts(3, 40, 10, 6));
    CHECK(pooled.n() == 120);
    CHECK(pooled.sample_ids.size() == 120);
}
