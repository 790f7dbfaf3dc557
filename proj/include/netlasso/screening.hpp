#pragma once

#include <vector>

#include "netlasso/cd_solver.hpp"

namespace netlasso {

struct PrescreenResult {
    Vector scores;             // |X_j^T y|
    std::vector<int> ranking;  // SNP indices, best first; ties by ascending index
};

PrescreenResult prescreen_scores(const StandardizedDesign& sd);

struct KktReport {
    bool ok = true;
    std::vector<TermId> violations;
};

/// Checks optimality of `coeffs` for the full problem. Zero coordinates are
/// held against their subgradient bounds, nonzero ones against stationarity.
/// A zero main effect whose group already carries a nonzero interaction is
/// not checked: its entry threshold is zero and the solver updates it freely.
/// Every all-zero group is also checked jointly, since single-coordinate
/// bounds can all hold while a move of the whole group still pays off.
KktReport kkt_satisfied(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                        const CoefficientState& coeffs, double slack = 1e-8);

struct ScreenPlan {
    int s = 1;
    int k = 10;  // initial working-set size, usually 10 * s
    int multiplier = 2;
    double kkt_slack = 1e-8;

    static ScreenPlan for_target(int s);
    void validate(int p) const;
};

/// Screen-fit-verify loop. Fits on the top-k scored SNPs, checks the KKT
/// conditions of the full problem and grows k on any violation by an omitted
/// term, warm-starting each refit. Terminates at the latest once k == p.
Solution swindle_fit(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                     const ScreenPlan& plan, const CoefficientState* warm_start = nullptr);

}  // namespace netlasso
