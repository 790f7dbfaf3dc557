#pragma once

#include <optional>
#include <utility>

#include "netlasso/screening.hpp"

namespace netlasso {

struct TuneSpec {
    int s_target = 25;
    int s_slack = 1;
    // Exactly one of r, c.
    std::optional<double> r;
    std::optional<double> c;
    std::optional<std::pair<double, double>> lambda1_bounds;
    bool c_median = false;
    // Return the closest probe instead of throwing TargetUnreachable.
    bool accept_closest = false;
    SolverConfig solver;  // lambda fields are overwritten by the search

    void validate() const;
};

enum class CAggregate { Mean, Median };

/// c = aggregate over allowed pairs of (w_jj / w_jk) * ||X_jk||, divided by r.
double c_from_r(const StandardizedDesign& sd, const WeightMatrix& w, double r,
                CAggregate agg = CAggregate::Mean);

// Resolves spec.c or spec.r into a c value for this design.
double resolve_c(const StandardizedDesign& sd, const WeightMatrix& w, const TuneSpec& spec);

struct TuneResult {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Solution solution;
    int probes = 0;
    int monotonicity_violations = 0;
    bool on_target = true;
};

// Largest lambda1 worth probing: at or above it the model is empty.
double lambda1_upper(const StandardizedDesign& sd, const WeightMatrix& w, double c);

/// Searches lambda1 (with lambda2 = c * lambda1) until the number of selected
/// main effects lies in [s - slack, s + slack]. Steps down geometrically from
/// the empty-model bound with warm starts, then bisects the bracket on a log
/// scale.
TuneResult lambda1_for_target(const StandardizedDesign& sd, const WeightMatrix& w, const TuneSpec& spec,
                              double c);

/// Unshrunken-estimate threshold above which `term` enters, given the
/// current nonzero pattern. For interactions `pair_norm` is ||X_jk||.
double entry_threshold(const TermId& term, const WeightMatrix& w, double lambda1, double lambda2,
                       const CoefficientState& pattern, double pair_norm = 1.0);

}  // namespace netlasso
