#include "netlasso/refit_inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "netlasso/stats.hpp"

namespace netlasso {

FitReport ols_refit(const StandardizedDesign& sd, const std::vector<TermId>& terms) {
    const int n = sd.n();
    const int m = static_cast<int>(terms.size());
    if (m + 1 >= n) {
        throw Error(ErrorCode::TooManyTerms, std::to_string(m) + " terms leave no residual degrees of freedom");
    }
    Matrix design(n, m + 1);
    design.col(0).setOnes();
    for (int i = 0; i < m; ++i) {
        const TermId& t = terms[static_cast<std::size_t>(i)];
        if (t.first() < 0 || t.first() >= sd.p() || t.second() >= sd.p()) {
            throw Error(ErrorCode::IndexOutOfRange, "refit term out of range");
        }
        design.col(i + 1) = t.is_main() ? Vector(sd.x.col(t.first())) : interaction_column(sd, t.first(), t.second());
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < m + 1) {
        std::ostringstream msg;
        msg << "refit design is rank deficient; dependent terms:";
        const auto& perm = qr.colsPermutation().indices();
        for (int i = static_cast<int>(qr.rank()); i < m + 1; ++i) {
            const int col = perm[i];
            msg << ' ' << (col == 0 ? std::string("(intercept)") : terms[static_cast<std::size_t>(col - 1)].label(sd.snp_ids));
        }
        throw Error(ErrorCode::RankDeficient, msg.str());
    }
    const Vector coef = qr.solve(sd.y);
    const Vector resid = sd.y - design * coef;

    FitReport rep;
    rep.terms = terms;
    rep.df = n - m - 1;
    rep.rss = resid.squaredNorm();
    rep.intercept = coef[0];
    const double sigma2 = rep.rss / rep.df;

    // diag((X^T X)^{-1}) from R: inv(R) rows, permuted back.
    const int cols = m + 1;
    const Matrix r = qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(cols, cols));
    const Vector diag_perm = rinv.rowwise().squaredNorm();
    Vector diag(cols);
    for (int i = 0; i < cols; ++i) diag[qr.colsPermutation().indices()[i]] = diag_perm[i];

    rep.beta.resize(static_cast<std::size_t>(m));
    rep.se.resize(static_cast<std::size_t>(m));
    rep.t.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const auto is = static_cast<std::size_t>(i);
        rep.beta[is] = coef[i + 1];
        rep.se[is] = std::sqrt(sigma2 * diag[i + 1]);
        rep.t[is] = rep.se[is] > 0.0 ? rep.beta[is] / rep.se[is]
                                     : (rep.beta[is] == 0.0 ? 0.0 : std::copysign(INFINITY, rep.beta[is]));
    }
    const std::vector<TermId> order = rank_terms(rep);
    rep.rank.resize(static_cast<std::size_t>(m));
    for (int pos = 0; pos < m; ++pos) {
        const auto it = std::find(rep.terms.begin(), rep.terms.end(), order[static_cast<std::size_t>(pos)]);
        rep.rank[static_cast<std::size_t>(it - rep.terms.begin())] = pos + 1;
    }
    return rep;
}

FitReport refit_dataset(const Dataset& ds, const std::vector<TermId>& terms) {
    std::vector<int> snps;
    for (const auto& t : terms) {
        snps.push_back(t.first());
        if (t.is_interaction()) snps.push_back(t.second());
    }
    std::sort(snps.begin(), snps.end());
    snps.erase(std::unique(snps.begin(), snps.end()), snps.end());
    auto local = [&](int j) {
        return static_cast<int>(std::lower_bound(snps.begin(), snps.end(), j) - snps.begin());
    };

    Dataset sub;
    sub.y = ds.y;
    sub.x.resize(ds.n(), static_cast<Eigen::Index>(snps.size()));
    for (std::size_t i = 0; i < snps.size(); ++i) {
        if (snps[i] < 0 || snps[i] >= ds.p()) throw Error(ErrorCode::IndexOutOfRange, "refit term out of range");
        sub.x.col(static_cast<Eigen::Index>(i)) = ds.x.col(snps[i]);
        sub.snp_ids.push_back(ds.snp_ids[static_cast<std::size_t>(snps[i])]);
    }
    if (snps.empty()) {
        // Intercept-only refit; a dummy column keeps standardize() happy.
        sub.x = Matrix::Zero(ds.n(), 1);
        sub.x(0, 0) = 1.0;
        sub.snp_ids = {"_"};
    }
    std::vector<TermId> mapped;
    for (const auto& t : terms) {
        mapped.push_back(t.is_main() ? TermId::Main(local(t.first())) : TermId::Inter(local(t.first()), local(t.second())));
    }
    FitReport rep = ols_refit(standardize(sub), mapped);
    rep.terms = terms;
    return rep;
}

std::vector<TermId> rank_terms(const FitReport& report) {
    std::vector<std::size_t> idx(report.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double ta = std::abs(report.t[a]);
        const double tb = std::abs(report.t[b]);
        if (ta != tb) return ta > tb;
        return report.terms[a] < report.terms[b];
    });
    std::vector<TermId> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(report.terms[i]);
    return out;
}

std::pair<std::vector<int>, std::vector<int>> random_halves(int n, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto first = static_cast<std::ptrdiff_t>((n + 1) / 2);
    std::vector<int> a(perm.begin(), perm.begin() + first);
    std::vector<int> b(perm.begin() + first, perm.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {std::move(a), std::move(b)};
}

std::vector<TermId> select_terms(const Dataset& sel, const WeightMatrix& w, const TuneSpec& spec,
                                 double* lambda1_out) {
    const StandardizedDesign sd = standardize(sel);
    const double c = resolve_c(sd, w, spec);
    TuneResult tr = lambda1_for_target(sd, w, spec, c);
    if (lambda1_out != nullptr) *lambda1_out = tr.lambda1;
    return tr.solution.coeffs.terms();
}

SplitResult split_half_z(const Dataset& ds, const WeightMatrix& w, const TuneSpec& spec, std::uint64_t seed,
                         const SplitOptions& opts) {
    if (ds.n() < 4) throw Error(ErrorCode::EmptyData, "split-sample inference needs n >= 4");
    SplitResult out;
    std::tie(out.selection_rows, out.refit_rows) = random_halves(ds.n(), seed);

    TuneSpec sel_spec = spec;
    if (opts.c_override) {
        sel_spec.c = *opts.c_override;
        sel_spec.r.reset();
    }
    const std::vector<TermId> selected = select_terms(subset_rows(ds, out.selection_rows), w, sel_spec, &out.lambda1);

    out.report = refit_dataset(subset_rows(ds, out.refit_rows), selected);
    const std::size_t m = selected.size();
    for (std::size_t i = 0; i < m; ++i) {
        double log_p = t_two_sided_log_p(out.report.t[i], out.report.df);
        if (opts.bonferroni) log_p = bonferroni_log(log_p, m);
        const double z = signed_z_from_log_p(log_p, out.report.t[i]);
        if (z != 0.0) out.z[selected[i]] = z;
    }
    return out;
}

}  // namespace netlasso
