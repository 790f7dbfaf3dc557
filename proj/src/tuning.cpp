#include "netlasso/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace netlasso {

void TuneSpec::validate() const {
    if (s_target < 1) throw Error(ErrorCode::InvalidArgument, "s must be >= 1", "s");
    if (s_slack < 0) throw Error(ErrorCode::InvalidArgument, "slack must be >= 0", "slack");
    if (r.has_value() == c.has_value()) {
        throw Error(ErrorCode::InvalidArgument, "exactly one of r and c must be given", "c");
    }
    if (r && !(*r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive", "r");
    if (c && !(*c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be non-negative", "c");
    if (lambda1_bounds && !(lambda1_bounds->first > 0.0 && lambda1_bounds->first < lambda1_bounds->second)) {
        throw Error(ErrorCode::InvalidArgument, "lambda1 bounds must satisfy 0 < lo < hi", "lambda1_bounds");
    }
}

double c_from_r(const StandardizedDesign& sd, const WeightMatrix& w, double r, CAggregate agg) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive", "r");
    if (w.pair_count() == 0) throw Error(ErrorCode::NoAllowedPairs, "weight matrix allows no interactions");
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(w.pair_count()));
    for (const auto& pr : w.pairs()) {
        const double norm = interaction_column(sd, pr.j, pr.k).norm();
        vals.push_back(w.diag(pr.j) / pr.weight * norm);
    }
    double centre = 0.0;
    if (agg == CAggregate::Mean) {
        for (double v : vals) centre += v;
        centre /= static_cast<double>(vals.size());
    } else {
        const std::size_t mid = vals.size() / 2;
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
        centre = vals[mid];
        if (vals.size() % 2 == 0) {
            centre = 0.5 * (centre + *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid)));
        }
    }
    return centre / r;
}

double resolve_c(const StandardizedDesign& sd, const WeightMatrix& w, const TuneSpec& spec) {
    spec.validate();
    if (spec.c) return *spec.c;
    return c_from_r(sd, w, *spec.r, spec.c_median ? CAggregate::Median : CAggregate::Mean);
}

double lambda1_upper(const StandardizedDesign& sd, const WeightMatrix& w, double c) {
    double hi = 0.0;
    const Vector xty = sd.x.transpose() * sd.y;
    for (int j = 0; j < sd.p(); ++j) {
        if (w.main_allowed(j)) hi = std::max(hi, std::abs(xty[j]) / (w.diag(j) * sd.x.col(j).norm()));
    }
    // An interaction with both rows empty enters above (2 + c) lambda1 w ||X_jk||.
    for (const auto& pr : w.pairs()) {
        const Vector col = interaction_column(sd, pr.j, pr.k);
        const double norm = col.norm();
        if (norm == 0.0) continue;
        hi = std::max(hi, std::abs(col.dot(sd.y)) / ((2.0 + c) * pr.weight * norm));
    }
    return hi;
}

namespace {

struct Probe {
    double lambda1;
    int count;
    Solution sol;
};

}  // namespace

TuneResult lambda1_for_target(const StandardizedDesign& sd, const WeightMatrix& w, const TuneSpec& spec,
                              double c) {
    spec.validate();
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "c must be finite and >= 0", "c");
    const int lo_ok = spec.s_target - spec.s_slack;
    const int hi_ok = spec.s_target + spec.s_slack;
    const ScreenPlan plan = ScreenPlan::for_target(spec.s_target);

    double lam_hi = spec.lambda1_bounds ? spec.lambda1_bounds->second : lambda1_upper(sd, w, c);
    if (!(lam_hi > 0.0)) throw Error(ErrorCode::TargetUnreachable, "response is orthogonal to every term");
    const double floor = spec.lambda1_bounds ? spec.lambda1_bounds->first : lam_hi * 1e-4;
    const double width_tol = 1e-6 * lam_hi;

    TuneResult res;
    std::vector<std::pair<double, int>> path;  // (lambda1, count), for monotonicity checks
    auto run = [&](double lam, const CoefficientState* warm) {
        SolverConfig cfg = spec.solver;
        cfg.lambda1 = lam;
        cfg.lambda2 = c * lam;
        Probe pr{lam, 0, swindle_fit(sd, w, cfg, plan, warm)};
        pr.count = pr.sol.coeffs.main_count();
        ++res.probes;
        for (const auto& [l, n] : path) {
            if ((l > lam && n > pr.count) || (l < lam && n < pr.count)) {
                ++res.monotonicity_violations;
                break;
            }
        }
        path.emplace_back(lam, pr.count);
        return pr;
    };
    auto distance = [&](int count) { return count < lo_ok ? lo_ok - count : (count > hi_ok ? count - hi_ok : 0); };
    auto finish = [&](Probe& pr, bool on_target) {
        res.lambda1 = pr.lambda1;
        res.lambda2 = c * pr.lambda1;
        res.solution = std::move(pr.sol);
        res.on_target = on_target;
        return res;
    };

    Probe upper = spec.lambda1_bounds ? run(lam_hi, nullptr) : Probe{lam_hi, 0, {}};
    if (!spec.lambda1_bounds) {
        upper.sol.converged = true;
        SolverConfig cfg = spec.solver;
        cfg.lambda1 = lam_hi;
        cfg.lambda2 = c * lam_hi;
        upper.sol.objective = objective(sd, w, cfg, upper.sol.coeffs);
    }
    if (distance(upper.count) == 0) return finish(upper, true);
    Probe best = upper;

    // Geometric descent until the count reaches the window from below.
    Probe lower{0.0, 0, {}};
    bool bracketed = false;
    double lam = lam_hi;
    while (true) {
        lam *= 0.8;
        if (lam < floor) break;
        Probe pr = run(lam, &upper.sol.coeffs);
        if (distance(pr.count) < distance(best.count)) best = pr;
        if (distance(pr.count) == 0) return finish(pr, true);
        if (pr.count > hi_ok) {
            lower = std::move(pr);
            bracketed = true;
            break;
        }
        upper = std::move(pr);
    }

    if (bracketed) {
        while (upper.lambda1 - lower.lambda1 > width_tol) {
            const double mid = std::sqrt(upper.lambda1 * lower.lambda1);
            Probe pr = run(mid, &upper.sol.coeffs);
            if (distance(pr.count) < distance(best.count)) best = pr;
            if (distance(pr.count) == 0) return finish(pr, true);
            if (pr.count > hi_ok) {
                lower = std::move(pr);
            } else {
                upper = std::move(pr);
            }
        }
    }

    if (spec.accept_closest) return finish(best, false);
    std::ostringstream msg;
    msg << "no lambda1 gives " << spec.s_target << " +/- " << spec.s_slack << " main effects; closest count "
        << best.count << " at lambda1=" << best.lambda1 << "; bracket [" << (bracketed ? lower.lambda1 : floor)
        << ", " << upper.lambda1 << "]";
    throw Error(ErrorCode::TargetUnreachable, msg.str(), "s");
}

double entry_threshold(const TermId& term, const WeightMatrix& w, double lambda1, double lambda2,
                       const CoefficientState& pattern, double pair_norm) {
    if (term.is_main()) {
        const int j = term.first();
        for (const auto& nb : w.neighbors(j)) {
            if (pattern.get(TermId::Inter(j, nb.snp)) != 0.0) return 0.0;
        }
        return lambda1 * w.diag(j);
    }
    const double wt = w.weight(term.first(), term.second());
    if (!std::isfinite(wt)) return wt;
    // Rows are judged without the term itself.
    CoefficientState others = pattern;
    others.set(term, 0.0);
    auto empty = [&](int j) {
        if (others.get(TermId::Main(j)) != 0.0) return false;
        for (const auto& nb : w.neighbors(j)) {
            if (others.get(TermId::Inter(j, nb.snp)) != 0.0) return false;
        }
        return true;
    };
    const int empty_rows = (empty(term.first()) ? 1 : 0) + (empty(term.second()) ? 1 : 0);
    return (empty_rows * lambda1 + lambda2) * wt / pair_norm;
}

}  // namespace netlasso
