#include "netlasso/meta_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "netlasso/stats.hpp"

namespace netlasso {

void CohortSet::validate() const {
    if (cohorts.empty()) throw Error(ErrorCode::EmptyData, "no cohorts given");
    for (std::size_t m = 0; m < cohorts.size(); ++m) {
        netlasso::validate(cohorts[m]);
        if (cohorts[m].snp_ids != cohorts[0].snp_ids) {
            throw Error(ErrorCode::SampleMismatch, "cohorts do not share the same SNP panel",
                        m < labels.size() ? labels[m] : std::to_string(m));
        }
    }
}

double MetaResult::z(const TermId& t) const {
    const auto it = terms.find(t);
    return it == terms.end() ? 0.0 : it->second.z;
}

Vector combine_stouffer(const Matrix& z_by_cohort) {
    if (z_by_cohort.rows() < 1) throw Error(ErrorCode::EmptyData, "Stouffer combination needs at least one cohort");
    return z_by_cohort.colwise().sum().transpose() / std::sqrt(static_cast<double>(z_by_cohort.rows()));
}

IvCombined combine_inverse_variance(const Matrix& beta_by_cohort, const Matrix& se_by_cohort) {
    if (beta_by_cohort.rows() != se_by_cohort.rows() || beta_by_cohort.cols() != se_by_cohort.cols()) {
        throw Error(ErrorCode::InvalidArgument, "beta and se shapes differ");
    }
    if (beta_by_cohort.rows() < 1) throw Error(ErrorCode::EmptyData, "inverse-variance combination needs a cohort");
    if (!(se_by_cohort.array() > 0.0).all() || !se_by_cohort.allFinite()) {
        throw Error(ErrorCode::NonPositiveSE, "standard errors must be positive and finite");
    }
    const Matrix wts = se_by_cohort.array().square().inverse().matrix();
    const Vector wsum = wts.colwise().sum().transpose();
    IvCombined out;
    out.beta = (wts.array() * beta_by_cohort.array()).colwise().sum().transpose() / wsum.array();
    out.se = wsum.array().rsqrt();
    return out;
}

Dataset pool_cohorts(const CohortSet& cs) {
    cs.validate();
    int n = 0;
    for (const auto& c : cs.cohorts) n += c.n();
    Dataset out;
    out.snp_ids = cs.cohorts[0].snp_ids;
    out.y.resize(n);
    out.x.resize(n, cs.cohorts[0].p());
    int row = 0;
    for (std::size_t m = 0; m < cs.cohorts.size(); ++m) {
        const auto& c = cs.cohorts[m];
        out.y.segment(row, c.n()) = c.y;
        out.x.middleRows(row, c.n()) = c.x;
        for (int i = 0; i < c.n(); ++i) {
            const std::string prefix = m < cs.labels.size() ? cs.labels[m] : std::to_string(m);
            out.sample_ids.push_back(c.sample_ids.empty() ? prefix + ":" + std::to_string(i)
                                                          : prefix + ":" + c.sample_ids[static_cast<std::size_t>(i)]);
        }
        row += c.n();
    }
    return out;
}

namespace {

bool recoverable(const Error& e) {
    switch (e.code()) {
        case ErrorCode::TargetUnreachable:
        case ErrorCode::TooManyTerms:
        case ErrorCode::RankDeficient:
        case ErrorCode::ConstantColumn:
            return true;
        default:
            return false;
    }
}

// Accumulates per-split results into final per-term averages.
class SplitAverager {
public:
    explicit SplitAverager(int K) : K_(K) {}

    void add_z(const TermZ& z) {
        for (const auto& [t, v] : z) {
            auto& acc = acc_[t];
            acc.z += v;
            ++acc.selected;
        }
    }

    void add_union(const std::vector<TermId>& terms) {
        for (const auto& t : terms) ++acc_[t].selected;
    }

    void add_iv(const std::map<TermId, std::pair<double, double>>& est) {
        for (const auto& [t, be] : est) {
            auto& acc = acc_[t];
            acc.z += be.first / be.second;
            acc.beta += be.first;
            acc.se += be.second;
            ++acc.iv_count;
        }
    }

    // final_bonferroni: round trip over the number of nonzero averaged Z.
    MetaResult finish(char procedure, bool final_bonferroni, bool with_beta, int skipped) const {
        MetaResult res;
        res.procedure = procedure;
        res.K = K_;
        res.skipped_units = skipped;
        for (const auto& [t, acc] : acc_) {
            MetaTerm mt;
            mt.z = acc.z / K_;
            mt.n_splits_selected = acc.selected;
            if (with_beta && acc.iv_count > 0) {
                mt.beta = acc.beta / acc.iv_count;
                mt.se = acc.se / acc.iv_count;
            }
            res.terms.emplace(t, mt);
        }
        if (final_bonferroni) apply_bonferroni(res);
        return res;
    }

    static void apply_bonferroni(MetaResult& res) {
        std::size_t m = 0;
        for (const auto& [t, mt] : res.terms) m += mt.z != 0.0 ? 1 : 0;
        for (auto& [t, mt] : res.terms) mt.z = bonferroni_round_trip(mt.z, m);
    }

private:
    struct Acc {
        double z = 0.0;
        double beta = 0.0;
        double se = 0.0;
        int selected = 0;
        int iv_count = 0;
    };
    int K_;
    std::map<TermId, Acc> acc_;
};

std::vector<TermId> union_of(const std::vector<std::vector<TermId>>& sets, const std::vector<int>& members) {
    std::set<TermId> u;
    for (int m : members) u.insert(sets[static_cast<std::size_t>(m)].begin(), sets[static_cast<std::size_t>(m)].end());
    return {u.begin(), u.end()};
}

// Inverse-variance meta-analysis of `terms` over the given refits; nullopt
// entries (failed refits) are skipped.
std::map<TermId, std::pair<double, double>> iv_meta(const std::vector<TermId>& terms,
                                                     const std::vector<std::optional<FitReport>>& fits) {
    std::map<TermId, std::pair<double, double>> out;
    std::vector<const FitReport*> ok;
    for (const auto& f : fits) {
        if (f) ok.push_back(&*f);
    }
    if (ok.empty() || terms.empty()) return out;
    Matrix beta(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(terms.size()));
    Matrix se(beta.rows(), beta.cols());
    for (std::size_t m = 0; m < ok.size(); ++m) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            beta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = ok[m]->beta[i];
            se(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = ok[m]->se[i];
        }
    }
    if (!(se.array() > 0.0).all()) return out;
    const IvCombined comb = combine_inverse_variance(beta, se);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        out.emplace(terms[i], std::make_pair(comb.beta[static_cast<Eigen::Index>(i)], comb.se[static_cast<Eigen::Index>(i)]));
    }
    return out;
}

std::optional<FitReport> try_refit(const Dataset& ds, const std::vector<TermId>& terms) {
    try {
        return refit_dataset(ds, terms);
    } catch (const Error& e) {
        if (!recoverable(e)) throw;
        return std::nullopt;
    }
}

void check_k(int K) {
    if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1", "K");
}

}  // namespace

MetaResult run_procedure_a(const Dataset& pooled, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts) {
    check_k(K);
    std::vector<std::optional<TermZ>> zs(static_cast<std::size_t>(K));
    parallel_for(zs.size(), [&](std::size_t k) {
        try {
            zs[k] = split_half_z(pooled, w, spec, mix_seed(seed, k)).z;
        } catch (const Error& e) {
            if (!recoverable(e)) throw;
        }
    }, opts.threads);
    SplitAverager avg(K);
    int skipped = 0;
    for (const auto& z : zs) {
        if (z) {
            avg.add_z(*z);
        } else {
            ++skipped;
        }
    }
    return avg.finish('A', false, false, skipped);
}

MetaResult run_procedure_b(const CohortSet& cs, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts) {
    check_k(K);
    cs.validate();
    const int M = cs.size();
    if (M < 2) throw Error(ErrorCode::InvalidArgument, "procedure B needs at least two cohorts", "cohorts");
    int skipped = 0;

    // Step 1: every cohort selects once on all of its data.
    std::vector<std::vector<TermId>> selected(static_cast<std::size_t>(M));
    std::vector<char> failed(static_cast<std::size_t>(M), 0);
    parallel_for(selected.size(), [&](std::size_t m) {
        try {
            selected[m] = select_terms(cs.cohorts[m], w, spec);
        } catch (const Error& e) {
            if (!recoverable(e)) throw;
            failed[m] = 1;
        }
    }, opts.threads);
    skipped += static_cast<int>(std::count(failed.begin(), failed.end(), 1));

    // Step 2: K random cohort splits; group 1 gets ceil(M/2).
    std::vector<std::vector<int>> group1(static_cast<std::size_t>(K)), group2(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        std::vector<int> order(static_cast<std::size_t>(M));
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
        std::shuffle(order.begin(), order.end(), rng);
        const auto g1 = static_cast<std::ptrdiff_t>((M + 1) / 2);
        group1[static_cast<std::size_t>(k)].assign(order.begin(), order.begin() + g1);
        group2[static_cast<std::size_t>(k)].assign(order.begin() + g1, order.end());
    }
    std::vector<std::vector<TermId>> unions(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) unions[static_cast<std::size_t>(k)] = union_of(selected, group1[static_cast<std::size_t>(k)]);

    // Refit units: (split, group-2 cohort).
    std::vector<std::pair<int, int>> units;
    for (int k = 0; k < K; ++k) {
        for (int m : group2[static_cast<std::size_t>(k)]) units.emplace_back(k, m);
    }
    std::vector<std::optional<FitReport>> fits(units.size());
    parallel_for(units.size(), [&](std::size_t u) {
        const auto [k, m] = units[u];
        fits[u] = try_refit(cs.cohorts[static_cast<std::size_t>(m)], unions[static_cast<std::size_t>(k)]);
    }, opts.threads);

    SplitAverager avg(K);
    std::size_t u = 0;
    for (int k = 0; k < K; ++k) {
        std::vector<std::optional<FitReport>> split_fits;
        for (std::size_t i = 0; i < group2[static_cast<std::size_t>(k)].size(); ++i, ++u) {
            if (!fits[u]) ++skipped;
            split_fits.push_back(std::move(fits[u]));
        }
        avg.add_iv(iv_meta(unions[static_cast<std::size_t>(k)], split_fits));
        avg.add_union(unions[static_cast<std::size_t>(k)]);
    }
    return avg.finish('B', true, true, skipped);
}

MetaResult run_procedure_c(const CohortSet& cs, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts) {
    check_k(K);
    cs.validate();
    const int M = cs.size();
    std::vector<std::optional<TermZ>> zs(static_cast<std::size_t>(M * K));
    SplitOptions so;
    so.bonferroni = false;
    parallel_for(zs.size(), [&](std::size_t u) {
        const auto m = u / static_cast<std::size_t>(K);
        const auto k = u % static_cast<std::size_t>(K);
        try {
            zs[u] = split_half_z(cs.cohorts[m], w, spec, mix_seed(seed, m + 1, k), so).z;
        } catch (const Error& e) {
            if (!recoverable(e)) throw;
        }
    }, opts.threads);

    int skipped = 0;
    std::set<TermId> all_terms;
    std::vector<std::map<TermId, double>> cohort_mean(static_cast<std::size_t>(M));
    std::map<TermId, int> selected_count;
    for (std::size_t u = 0; u < zs.size(); ++u) {
        if (!zs[u]) {
            ++skipped;
            continue;
        }
        auto& cm = cohort_mean[u / static_cast<std::size_t>(K)];
        for (const auto& [t, z] : *zs[u]) {
            cm[t] += z / K;
            all_terms.insert(t);
            ++selected_count[t];
        }
    }
    const std::vector<TermId> terms(all_terms.begin(), all_terms.end());
    Matrix zmat = Matrix::Zero(M, static_cast<Eigen::Index>(terms.size()));
    for (int m = 0; m < M; ++m) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& cm = cohort_mean[static_cast<std::size_t>(m)];
            const auto it = cm.find(terms[i]);
            if (it != cm.end()) zmat(m, static_cast<Eigen::Index>(i)) = it->second;
        }
    }
    const Vector comb = terms.empty() ? Vector() : combine_stouffer(zmat);
    MetaResult res;
    res.procedure = 'C';
    res.K = K;
    res.skipped_units = skipped;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        MetaTerm mt;
        mt.z = comb[static_cast<Eigen::Index>(i)];
        mt.n_splits_selected = selected_count[terms[i]];
        res.terms.emplace(terms[i], mt);
    }
    SplitAverager::apply_bonferroni(res);
    return res;
}

MetaResult run_procedure_d(const CohortSet& cs, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts) {
    check_k(K);
    cs.validate();
    const int M = cs.size();
    const auto units = static_cast<std::size_t>(M * K);
    std::vector<std::vector<int>> refit_rows(units);
    std::vector<std::vector<TermId>> selected(units);
    std::vector<char> failed(units, 0);
    parallel_for(units, [&](std::size_t u) {
        const auto k = u / static_cast<std::size_t>(M);
        const auto m = u % static_cast<std::size_t>(M);
        auto [sel_rows, fit_rows] = random_halves(cs.cohorts[m].n(), mix_seed(seed, m + 1, k));
        refit_rows[u] = std::move(fit_rows);
        try {
            selected[u] = select_terms(subset_rows(cs.cohorts[m], sel_rows), w, spec);
        } catch (const Error& e) {
            if (!recoverable(e)) throw;
            failed[u] = 1;
        }
    }, opts.threads);
    int skipped = static_cast<int>(std::count(failed.begin(), failed.end(), 1));

    std::vector<std::vector<TermId>> unions(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        std::vector<int> members(static_cast<std::size_t>(M));
        std::iota(members.begin(), members.end(), k * M);
        unions[static_cast<std::size_t>(k)] = union_of(selected, members);
    }
    std::vector<std::optional<FitReport>> fits(units);
    parallel_for(units, [&](std::size_t u) {
        const auto k = u / static_cast<std::size_t>(M);
        const auto m = u % static_cast<std::size_t>(M);
        fits[u] = try_refit(subset_rows(cs.cohorts[m], refit_rows[u]), unions[k]);
    }, opts.threads);

    SplitAverager avg(K);
    for (int k = 0; k < K; ++k) {
        std::vector<std::optional<FitReport>> split_fits;
        for (int m = 0; m < M; ++m) {
            auto& f = fits[static_cast<std::size_t>(k * M + m)];
            if (!f) ++skipped;
            split_fits.push_back(std::move(f));
        }
        avg.add_iv(iv_meta(unions[static_cast<std::size_t>(k)], split_fits));
        avg.add_union(unions[static_cast<std::size_t>(k)]);
    }
    return avg.finish('D', true, true, skipped);
}

}  // namespace netlasso
