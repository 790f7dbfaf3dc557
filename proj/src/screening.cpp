#include "netlasso/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace netlasso {

PrescreenResult prescreen_scores(const StandardizedDesign& sd) {
    PrescreenResult out;
    out.scores = (sd.x.transpose() * sd.y).cwiseAbs();
    out.ranking.resize(static_cast<std::size_t>(sd.p()));
    std::iota(out.ranking.begin(), out.ranking.end(), 0);
    std::stable_sort(out.ranking.begin(), out.ranking.end(),
                     [&](int a, int b) { return out.scores[a] > out.scores[b]; });
    return out;
}

KktReport kkt_satisfied(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                        const CoefficientState& coeffs, double slack) {
    const int p = sd.p();
    const auto np = static_cast<std::size_t>(p);
    Vector fit = Vector::Zero(sd.n());
    std::vector<double> group(np, 0.0);
    for (const auto& [t, b] : coeffs) {
        if (t.is_main()) {
            fit.noalias() += b * sd.x.col(t.first());
            const double d = w.diag(t.first());
            group[static_cast<std::size_t>(t.first())] += d * d * sd.x.col(t.first()).squaredNorm() * b * b;
        } else {
            const Vector col = interaction_column(sd, t.first(), t.second());
            fit.noalias() += b * col;
            const double wt = w.weight(t.first(), t.second());
            const double sq = wt * wt * col.squaredNorm() * b * b;
            group[static_cast<std::size_t>(t.first())] += sq;
            group[static_cast<std::size_t>(t.second())] += sq;
        }
    }
    const Vector r = sd.y - fit;
    KktReport rep;
    auto flag = [&](const TermId& t) {
        rep.ok = false;
        rep.violations.push_back(t);
    };

    for (int j = 0; j < p; ++j) {
        if (!w.main_allowed(j)) continue;
        const double xn2 = sd.x.col(j).squaredNorm();
        const double grad = sd.x.col(j).dot(r);
        const double b = coeffs.get(TermId::Main(j));
        const double d = w.diag(j);
        const double g = group[static_cast<std::size_t>(j)];
        if (b != 0.0) {
            const double pen = cfg.lambda1 * d * d * xn2 * b / std::sqrt(g);
            if (std::abs(grad - pen) > slack) flag(TermId::Main(j));
        } else if (g == 0.0) {
            if (std::abs(grad) > cfg.lambda1 * d * std::sqrt(xn2) + slack) flag(TermId::Main(j));
        }
    }

    for (const auto& pr : w.pairs()) {
        const Vector col = interaction_column(sd, pr.j, pr.k);
        const double q = col.squaredNorm();
        const double sq = std::sqrt(q);
        const double grad = col.dot(r);
        const TermId t = TermId::Inter(pr.j, pr.k);
        const double b = coeffs.get(t);
        const double gj = group[static_cast<std::size_t>(pr.j)];
        const double gk = group[static_cast<std::size_t>(pr.k)];
        if (b != 0.0) {
            const double w2qb = pr.weight * pr.weight * q * b;
            const double pen = cfg.lambda1 * (w2qb / std::sqrt(gj) + w2qb / std::sqrt(gk)) +
                               cfg.lambda2 * pr.weight * sq * (b > 0.0 ? 1.0 : -1.0);
            if (std::abs(grad - pen) > slack) flag(t);
        } else {
            const int empty_rows = (gj == 0.0 ? 1 : 0) + (gk == 0.0 ? 1 : 0);
            const double bound = (empty_rows * cfg.lambda1 + cfg.lambda2) * pr.weight * sq;
            if (std::abs(grad) > bound + slack) flag(t);
        }
    }
    // Joint condition for all-zero groups: the thresholded gradient vector of
    // the group must lie in the lambda1 ball. Reported against Main(j), or the
    // group's first pair when the main effect is excluded.
    for (int j = 0; j < p; ++j) {
        if (group[static_cast<std::size_t>(j)] != 0.0) continue;
        double norm2 = 0.0;
        std::optional<TermId> label;
        if (w.main_allowed(j)) {
            const double s = std::abs(sd.x.col(j).dot(r)) / (w.diag(j) * sd.x.col(j).norm());
            norm2 += s * s;
            label = TermId::Main(j);
        }
        for (const auto& nb : w.neighbors(j)) {
            const auto& pr = w.pair(nb.pair_index);
            const Vector col = interaction_column(sd, pr.j, pr.k);
            const double scale = pr.weight * col.norm();
            const double tau = cfg.lambda2 + (group[static_cast<std::size_t>(nb.snp)] == 0.0 ? cfg.lambda1 : 0.0);
            const double s = std::max(0.0, std::abs(col.dot(r)) / scale - tau);
            norm2 += s * s;
            if (!label) label = TermId::Inter(pr.j, pr.k);
        }
        if (label && std::sqrt(norm2) > cfg.lambda1 + slack &&
            std::find(rep.violations.begin(), rep.violations.end(), *label) == rep.violations.end()) {
            flag(*label);
        }
    }
    return rep;
}

ScreenPlan ScreenPlan::for_target(int s) {
    ScreenPlan plan;
    plan.s = s;
    plan.k = 10 * s;
    return plan;
}

void ScreenPlan::validate(int p) const {
    if (s < 1) throw Error(ErrorCode::InvalidArgument, "screen target must be >= 1", "s");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "working-set size must be >= 1", "k");
    if (multiplier < 2) throw Error(ErrorCode::InvalidArgument, "multiplier must be >= 2", "multiplier");
    if (p < 1) throw Error(ErrorCode::EmptyData, "design has no columns");
}

Solution swindle_fit(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                     const ScreenPlan& plan, const CoefficientState* warm_start) {
    plan.validate(sd.p());
    const int p = sd.p();
    const PrescreenResult pre = prescreen_scores(sd);
    int k = std::min(plan.k, p);
    CoefficientState warm = warm_start != nullptr ? *warm_start : CoefficientState{};
    for (int round = 1;; ++round) {
        std::vector<char> mask(static_cast<std::size_t>(p), 0);
        for (int i = 0; i < k; ++i) mask[static_cast<std::size_t>(pre.ranking[static_cast<std::size_t>(i)])] = 1;
        FitOptions opts;
        opts.warm_start = &warm;
        opts.snp_mask = k < p ? &mask : nullptr;
        Solution sol = fit(sd, w, cfg, opts);
        sol.screen_rounds = round;
        sol.working_set = k;
        if (k == p) return sol;

        const KktReport rep = kkt_satisfied(sd, w, cfg, sol.coeffs, plan.kkt_slack);
        const bool omitted_violation = std::any_of(rep.violations.begin(), rep.violations.end(), [&](const TermId& t) {
            return mask[static_cast<std::size_t>(t.first())] == 0 ||
                   (t.is_interaction() && mask[static_cast<std::size_t>(t.second())] == 0);
        });
        if (!omitted_violation) return sol;
        k = static_cast<int>(std::min<long long>(static_cast<long long>(k) * plan.multiplier, p));
        warm = sol.coeffs;
    }
}

}  // namespace netlasso
