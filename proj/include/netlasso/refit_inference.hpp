#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "netlasso/tuning.hpp"

namespace netlasso {

struct FitReport {
    std::vector<TermId> terms;
    std::vector<double> beta;
    std::vector<double> se;
    std::vector<double> t;
    std::vector<int> rank;  // 1-based position by descending |t|
    double intercept = 0.0;
    double rss = 0.0;
    int df = 0;

    std::size_t size() const { return terms.size(); }
};

/// Ordinary least squares of y on an intercept plus the given columns.
/// Throws TooManyTerms when no residual degrees of freedom remain and
/// RankDeficient (listing the offending terms) for collinear designs.
FitReport ols_refit(const StandardizedDesign& sd, const std::vector<TermId>& terms);

// Standardizes only the SNPs that `terms` involve and refits them, so SNPs
// that happen to be constant in `ds` but are not used do not matter.
FitReport refit_dataset(const Dataset& ds, const std::vector<TermId>& terms);

// Descending |t|; ties broken by term order.
std::vector<TermId> rank_terms(const FitReport& report);

using TermZ = std::map<TermId, double>;

struct SplitOptions {
    bool bonferroni = true;
    // Fixes the c value instead of resolving spec.r on the selection half.
    std::optional<double> c_override;
};

struct SplitResult {
    TermZ z;  // selected terms only; absent terms have Z = 0
    FitReport report;
    std::vector<int> selection_rows;
    std::vector<int> refit_rows;
    double lambda1 = 0.0;
};

// Random half split of 0..n-1; the first half gets ceil(n/2) rows.
std::pair<std::vector<int>, std::vector<int>> random_halves(int n, std::uint64_t seed);

// Tunes on `sel` and returns the nonzero terms of the accepted fit.
std::vector<TermId> select_terms(const Dataset& sel, const WeightMatrix& w, const TuneSpec& spec,
                                 double* lambda1_out = nullptr);

/// Selects on one random half, refits on the other, converts t-based p-values
/// (Bonferroni-adjusted over the selected count unless disabled) to signed Z.
SplitResult split_half_z(const Dataset& ds, const WeightMatrix& w, const TuneSpec& spec, std::uint64_t seed,
                         const SplitOptions& opts = {});

}  // namespace netlasso
