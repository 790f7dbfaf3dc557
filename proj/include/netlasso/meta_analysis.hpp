#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netlasso/refit_inference.hpp"

namespace netlasso {

struct CohortSet {
    std::vector<Dataset> cohorts;
    std::vector<std::string> labels;

    int size() const { return static_cast<int>(cohorts.size()); }
    // Same SNP ids in the same order everywhere.
    void validate() const;
};

struct MetaTerm {
    double z = 0.0;
    std::optional<double> beta;
    std::optional<double> se;
    int n_splits_selected = 0;
};

struct MetaResult {
    char procedure = 'A';
    int K = 0;
    std::map<TermId, MetaTerm> terms;
    // Units (splits or cohort fits) skipped because selection or refit failed.
    int skipped_units = 0;

    double z(const TermId& t) const;
};

// Unweighted Stouffer: column sums / sqrt(M) of an M x T matrix.
Vector combine_stouffer(const Matrix& z_by_cohort);

struct IvCombined {
    Vector beta;
    Vector se;
};

// Fixed-effects inverse-variance combination over rows (cohorts).
IvCombined combine_inverse_variance(const Matrix& beta_by_cohort, const Matrix& se_by_cohort);

struct MetaOptions {
    int threads = 1;
};

MetaResult run_procedure_a(const Dataset& pooled, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts = {});
MetaResult run_procedure_b(const CohortSet& cs, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts = {});
MetaResult run_procedure_c(const CohortSet& cs, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts = {});
MetaResult run_procedure_d(const CohortSet& cs, const WeightMatrix& w, const TuneSpec& spec, int K,
                           std::uint64_t seed, const MetaOptions& opts = {});

// Row-concatenation of all cohorts (for Procedure A on multi-cohort input).
Dataset pool_cohorts(const CohortSet& cs);

}  // namespace netlasso
