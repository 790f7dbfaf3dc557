#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "netlasso/data_model.hpp"
#include "netlasso/network_penalty.hpp"

namespace netlasso {

struct SolverConfig {
    double lambda1 = 0.1;
    double lambda2 = 0.0;
    // max abs coefficient change over one full cycle
    double tol = 1e-6;
    int max_cycles = 1000;
    double nr_tol = 1e-13;
    int nr_max_iter = 50;
    // Shuffle the update order every cycle (testing order invariance).
    bool randomize_order = false;
    std::uint64_t order_seed = 0;

    void validate() const;
};

struct Solution {
    CoefficientState coeffs;
    double objective = 0.0;
    int cycles_used = 0;
    bool converged = false;
    // Filled in by swindle_fit: number of fit/verify rounds and final working-set size.
    int screen_rounds = 0;
    int working_set = 0;
};

// Penalized least-squares criterion: 1/2 RSS + lambda1 * sum of per-SNP group
// norms + lambda2 * sum of weighted interaction norms, with unnormalized
// ||X_jk beta_jk|| terms. Computed from scratch.
double objective(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                 const CoefficientState& coeffs);

// y minus every fitted contribution except that of `term`.
Vector partial_residual(const StandardizedDesign& sd, const CoefficientState& coeffs, const TermId& term);

// Single-coordinate minimizers evaluated from scratch against `coeffs`.
double shrink_main(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                   const CoefficientState& coeffs, int j);
double shrink_interaction(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                          const CoefficientState& coeffs, int j, int k);

using UpdateHook = std::function<void(const TermId& term, double old_value, double new_value)>;
using BlockHook = std::function<void(const std::vector<std::pair<TermId, double>>& moved)>;

struct FitOptions {
    const CoefficientState* warm_start = nullptr;
    // When set, only SNPs with a nonzero flag (and pairs inside them) are updated;
    // everything else is held at zero.
    const std::vector<char>* snp_mask = nullptr;
    // Called after every coordinate update that changes a coefficient.
    UpdateHook on_update;
    // Called after a joint move of a whole zero group (new values of the moved terms).
    BlockHook on_block_update;
};

/// Cyclic coordinate descent: each cycle visits all main effects in index order,
/// then all allowed pairs in lexicographic order. Between full cycles the
/// currently nonzero coordinates are iterated to convergence on their own.
/// Stops when a full cycle changes no coefficient by more than cfg.tol and
/// every all-zero SNP group passes its joint optimality check; a failing
/// group is moved jointly by a line search and cycling resumes. On hitting
/// max_cycles the solution is returned with converged == false.
Solution fit(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
             const FitOptions& opts = {});

}  // namespace netlasso
