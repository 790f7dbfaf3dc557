#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "netlasso/data_model.hpp"
#include "support.hpp"

using namespace netlasso;

TEST_CASE("standardize centres and scales the worked column") {
    Dataset ds;
    ds.x = Matrix(4, 1);
    ds.x << 0, 1, 2, 1;
    ds.y = Vector(4);
    ds.y << 1, 2, 3, 5;
    ds.snp_ids = {"a"};
    const auto sd = standardize(ds);
    CHECK(sd.x(0, 0) == doctest::Approx(-0.70711).epsilon(1e-5));
    CHECK(sd.x(1, 0) == doctest::Approx(0.0));
    CHECK(sd.x(2, 0) == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(sd.column_means[0] == doctest::Approx(1.0));
    CHECK(sd.column_norms[0] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("standardize: every column and y have mean 0 and norm 1") {
    const Dataset ds = testsupport::random_dataset(50, 10, 3);
    const auto sd = standardize(ds);
    for (int j = 0; j < sd.p(); ++j) {
        CHECK(std::abs(sd.x.col(j).mean()) < 1e-12);
        CHECK(std::abs(sd.x.col(j).norm() - 1.0) < 1e-12);
    }
    CHECK(std::abs(sd.y.mean()) < 1e-12);
    CHECK(std::abs(sd.y.norm() - 1.0) < 1e-12);
}

TEST_CASE("standardize is idempotent") {
    const Dataset ds = testsupport::random_dataset(40, 6, 4);
    const auto a = standardize(ds);
    Dataset again;
    again.x = a.x;
    again.y = a.y;
    again.snp_ids = a.snp_ids;
    const auto b = standardize(again);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant columns and traits are rejected") {
    Dataset ds = testsupport::random_dataset(20, 3, 5);
    ds.x.col(1).setConstant(1.0);
    try {
        standardize(ds);
        FAIL("expected ConstantColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConstantColumn);
        CHECK(e.field() == "snp2");
    }
    Dataset ds2 = testsupport::random_dataset(20, 3, 5);
    ds2.y.setConstant(2.0);
    CHECK_THROWS_AS(standardize(ds2), Error);
}

TEST_CASE("interaction_column is the raw product and symmetric") {
    const auto sd = standardize(testsupport::random_dataset(30, 4, 6));
    const Vector a = interaction_column(sd, 1, 3);
    const Vector b = interaction_column(sd, 3, 1);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < sd.n(); ++i) CHECK(a[i] == sd.x(i, 1) * sd.x(i, 3));
    CHECK_THROWS_AS(interaction_column(sd, 2, 2), Error);
    CHECK_THROWS_AS(interaction_column(sd, 0, 4), Error);
}

TEST_CASE("product norm of unit-norm columns scales like 1/n") {
    // With unit-norm columns each entry is O(n^{-1/2}), so ||X_j X_k||^2 is
    // close to E[z_j^2 z_k^2] / n = 1/n for independent SNPs.
    for (int n : {1000, 4000}) {
        const auto sd = standardize(testsupport::random_dataset(n, 40, 11));
        double mean = 0.0;
        int count = 0;
        for (int j = 0; j < 40; ++j) {
            for (int k = j + 1; k < 40; ++k) {
                mean += interaction_column(sd, j, k).squaredNorm();
                ++count;
            }
        }
        mean /= count;
        CHECK(mean * n == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("residualize") {
    Dataset ds = testsupport::random_dataset(60, 2, 8);
    SUBCASE("covariate equal to y leaves zero residual") {
        ds.covariates = Matrix(ds.y);
        const Dataset r = residualize(ds);
        CHECK(r.y.cwiseAbs().maxCoeff() < 1e-10);
        CHECK_FALSE(r.covariates.has_value());
    }
    SUBCASE("y = 3 + 2 age + e matches normal equations and is orthogonal to covariates") {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> nd;
        Matrix cov(60, 2);
        for (int i = 0; i < 60; ++i) {
            cov(i, 0) = 40 + 10 * nd(rng);
            cov(i, 1) = nd(rng);
        }
        Vector e(60);
        for (int i = 0; i < 60; ++i) e[i] = nd(rng);
        ds.y = (3.0 + 2.0 * cov.col(0).array()).matrix() + e;
        ds.covariates = cov;
        const Dataset r = residualize(ds);
        Matrix d(60, 3);
        d.col(0).setOnes();
        d.rightCols(2) = cov;
        const Vector coef = (d.transpose() * d).ldlt().solve(d.transpose() * ds.y);
        const Vector oracle = ds.y - d * coef;
        CHECK((r.y - oracle).cwiseAbs().maxCoeff() < 1e-8);
        for (int c = 0; c < 2; ++c) CHECK(std::abs(r.y.dot(cov.col(c))) <= 1e-8 * 60);
    }
    SUBCASE("collinear covariates") {
        Matrix cov(60, 2);
        cov.col(0).setLinSpaced(60, 0, 1);
        cov.col(1) = 2 * cov.col(0);
        ds.covariates = cov;
        try {
            residualize(ds);
            FAIL("expected RankDeficientCovariates");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::RankDeficientCovariates);
        }
    }
}

TEST_CASE("TermId canonical order and labels") {
    CHECK(TermId::Inter(3, 1) == TermId::Inter(1, 3));
    CHECK(TermId::Inter(3, 1).first() == 1);
    CHECK(TermId::Main(9) < TermId::Inter(0, 1));
    CHECK(TermId::Inter(0, 5) < TermId::Inter(1, 2));
    const std::vector<std::string> ids{"a", "b", "c"};
    CHECK(TermId::Inter(2, 0).label(ids) == "a:c");
    CHECK(parse_term("c:a", ids) == TermId::Inter(0, 2));
    CHECK(parse_term("b", ids) == TermId::Main(1));
    CHECK_THROWS_AS(parse_term("zz", ids), Error);
    CHECK_THROWS_AS(TermId::Inter(2, 2), Error);
}

TEST_CASE("CoefficientState stores only finite nonzero values") {
    CoefficientState cs;
    cs.set(TermId::Main(0), 1.5);
    cs.set(TermId::Inter(0, 1), -2.0);
    CHECK(cs.size() == 2);
    CHECK(cs.main_count() == 1);
    CHECK(cs.interaction_count() == 1);
    cs.set(TermId::Main(0), 0.0);
    CHECK(cs.size() == 1);
    CHECK(cs.get(TermId::Main(0)) == 0.0);
    CHECK_THROWS_AS(cs.set(TermId::Main(1), std::nan("")), Error);
}

TEST_CASE("validate and subset_rows") {
    Dataset ds = testsupport::random_dataset(10, 3, 2);
    CHECK_NOTHROW(validate(ds));
    ds.snp_ids[2] = "snp1";
    CHECK_THROWS_AS(validate(ds), Error);
    ds = testsupport::random_dataset(10, 3, 2);
    const std::vector<int> rows{0, 4, 9};
    const Dataset sub = subset_rows(ds, rows);
    CHECK(sub.n() == 3);
    CHECK(sub.y[1] == ds.y[4]);
    CHECK(sub.x(2, 1) == ds.x(9, 1));
}
