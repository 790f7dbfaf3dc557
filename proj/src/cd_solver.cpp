#include "netlasso/cd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "netlasso/shrinkage.hpp"

namespace netlasso {

void SolverConfig::validate() const {
    if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) {
        throw Error(ErrorCode::InvalidArgument, "lambda1 must be positive", "lambda1");
    }
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
        throw Error(ErrorCode::InvalidArgument, "lambda2 must be non-negative", "lambda2");
    }
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive", "tol");
    if (max_cycles < 1) throw Error(ErrorCode::InvalidArgument, "max_cycles must be >= 1", "max_cycles");
}

namespace {

double pair_dot(const StandardizedDesign& sd, int j, int k, const Vector& v) {
    return (sd.x.col(j).array() * sd.x.col(k).array() * v.array()).sum();
}

double pair_norm2(const StandardizedDesign& sd, int j, int k) {
    return (sd.x.col(j).array() * sd.x.col(k).array()).square().sum();
}

void check_shapes(const StandardizedDesign& sd, const WeightMatrix& w) {
    if (sd.p() != w.size()) {
        throw Error(ErrorCode::InvalidArgument, "weight matrix size does not match design", "weights");
    }
}

Vector fitted(const StandardizedDesign& sd, const CoefficientState& coeffs) {
    Vector f = Vector::Zero(sd.n());
    for (const auto& [t, b] : coeffs) {
        if (t.is_main()) {
            f.noalias() += b * sd.x.col(t.first());
        } else {
            f.array() += b * sd.x.col(t.first()).array() * sd.x.col(t.second()).array();
        }
    }
    return f;
}

// Weighted squared norm of SNP j's interactions, optionally leaving one pair out.
double group_remainder(const StandardizedDesign& sd, const WeightMatrix& w, const CoefficientState& coeffs,
                       int j, int skip) {
    double c = 0.0;
    for (const auto& nb : w.neighbors(j)) {
        if (nb.snp == skip) continue;
        const double b = coeffs.get(TermId::Inter(j, nb.snp));
        if (b == 0.0) continue;
        const double wt = w.pair(nb.pair_index).weight;
        c += wt * wt * pair_norm2(sd, j, nb.snp) * b * b;
    }
    return c;
}

class CoordinateDescent {
public:
    CoordinateDescent(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                      const FitOptions& opts)
        : sd_(sd), w_(w), cfg_(cfg), opts_(opts), root_{cfg.nr_tol, cfg.nr_max_iter} {
        const int p = sd.p();
        const auto np = static_cast<std::size_t>(w.pair_count());
        beta_main_.assign(static_cast<std::size_t>(p), 0.0);
        beta_pair_.assign(np, 0.0);
        pair_q_.assign(np, std::numeric_limits<double>::quiet_NaN());
        x_norm2_.resize(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) x_norm2_[static_cast<std::size_t>(j)] = sd.x.col(j).squaredNorm();
        group_sq_.assign(static_cast<std::size_t>(p), 0.0);
        group_nnz_.assign(static_cast<std::size_t>(p), 0);

        auto in_mask = [&](int j) {
            return opts.snp_mask == nullptr || (*opts.snp_mask)[static_cast<std::size_t>(j)] != 0;
        };
        for (int j = 0; j < p; ++j) {
            if (in_mask(j) && w.main_allowed(j)) coords_.push_back(Coord{true, j});
        }
        for (int idx = 0; idx < w.pair_count(); ++idx) {
            const auto& pr = w.pair(idx);
            if (in_mask(pr.j) && in_mask(pr.k)) coords_.push_back(Coord{false, idx});
        }

        if (opts.warm_start != nullptr) {
            for (const auto& [t, b] : *opts.warm_start) {
                if (t.first() >= p || t.second() >= p) {
                    throw Error(ErrorCode::IndexOutOfRange, "warm start term out of range");
                }
                if (t.is_main()) {
                    if (in_mask(t.first()) && w.main_allowed(t.first())) {
                        beta_main_[static_cast<std::size_t>(t.first())] = b;
                    }
                } else {
                    const int idx = w.pair_index(t.first(), t.second());
                    if (idx < 0) throw Error(ErrorCode::ExcludedPair, "warm start contains an excluded pair");
                    if (in_mask(t.first()) && in_mask(t.second())) beta_pair_[static_cast<std::size_t>(idx)] = b;
                }
            }
        }
        recompute_residual();
        recompute_groups();
    }

    Solution run() {
        Solution sol;
        std::mt19937_64 rng(cfg_.order_seed);
        std::vector<Coord> order = coords_;
        for (int cycle = 1; cycle <= cfg_.max_cycles; ++cycle) {
            sol.cycles_used = cycle;
            recompute_groups();
            if (cfg_.randomize_order) std::shuffle(order.begin(), order.end(), rng);
            const double change = sweep(order);
            if (change <= cfg_.tol) {
                // A coordinatewise fixed point can still be suboptimal when a
                // whole SNP group sits at zero; only a joint move escapes it.
                if (escape_zero_groups()) continue;
                sol.converged = true;
                break;
            }
            std::vector<Coord> active;
            for (const auto& c : order) {
                if (value(c) != 0.0) active.push_back(c);
            }
            for (int inner = 0; inner < cfg_.max_cycles; ++inner) {
                if (cfg_.randomize_order) std::shuffle(active.begin(), active.end(), rng);
                if (sweep(active) <= cfg_.tol) break;
            }
        }
        sol.coeffs = coefficients();
        sol.objective = objective(sd_, w_, cfg_, sol.coeffs);
        return sol;
    }

private:
    struct Coord {
        bool main;
        int index;  // SNP index or pair index
    };

    double value(const Coord& c) const {
        return c.main ? beta_main_[static_cast<std::size_t>(c.index)]
                      : beta_pair_[static_cast<std::size_t>(c.index)];
    }

    double q(int idx) {
        double& v = pair_q_[static_cast<std::size_t>(idx)];
        if (std::isnan(v)) {
            const auto& pr = w_.pair(idx);
            v = pair_norm2(sd_, pr.j, pr.k);
        }
        return v;
    }

    void recompute_residual() {
        r_ = sd_.y;
        for (int j = 0; j < sd_.p(); ++j) {
            const double b = beta_main_[static_cast<std::size_t>(j)];
            if (b != 0.0) r_.noalias() -= b * sd_.x.col(j);
        }
        for (int idx = 0; idx < w_.pair_count(); ++idx) {
            const double b = beta_pair_[static_cast<std::size_t>(idx)];
            if (b == 0.0) continue;
            const auto& pr = w_.pair(idx);
            r_.array() -= b * sd_.x.col(pr.j).array() * sd_.x.col(pr.k).array();
        }
    }

    void recompute_groups() {
        std::fill(group_sq_.begin(), group_sq_.end(), 0.0);
        std::fill(group_nnz_.begin(), group_nnz_.end(), 0);
        for (int idx = 0; idx < w_.pair_count(); ++idx) {
            const double b = beta_pair_[static_cast<std::size_t>(idx)];
            if (b == 0.0) continue;
            const auto& pr = w_.pair(idx);
            const double term = pr.weight * pr.weight * q(idx) * b * b;
            group_sq_[static_cast<std::size_t>(pr.j)] += term;
            group_sq_[static_cast<std::size_t>(pr.k)] += term;
            ++group_nnz_[static_cast<std::size_t>(pr.j)];
            ++group_nnz_[static_cast<std::size_t>(pr.k)];
        }
    }

    // Squared norm of SNP j's group excluding pair `skip_idx` (with current value `skip_beta`).
    double group_remainder_fast(int j, int skip_idx, double skip_beta) {
        const auto js = static_cast<std::size_t>(j);
        double c = 0.0;
        if (w_.main_allowed(j)) {
            const double bj = beta_main_[js];
            c += w_.diag(j) * w_.diag(j) * x_norm2_[js] * bj * bj;
        }
        const int others = group_nnz_[js] - (skip_beta != 0.0 ? 1 : 0);
        if (others > 0) {
            const auto& pr = w_.pair(skip_idx);
            const double own = pr.weight * pr.weight * q(skip_idx) * skip_beta * skip_beta;
            c += std::max(0.0, group_sq_[js] - own);
        }
        return c;
    }

    double update_main(int j) {
        const auto js = static_cast<std::size_t>(j);
        const double old = beta_main_[js];
        const double xn = x_norm2_[js];
        const double beta_hat = sd_.x.col(j).dot(r_) / xn + old;
        const double c = group_nnz_[js] > 0 ? group_sq_[js] : 0.0;
        const double alpha = main_shrinkage(beta_hat, cfg_.lambda1, w_.diag(j), xn, c, root_);
        const double next = alpha * beta_hat;
        const double delta = next - old;
        if (delta != 0.0) {
            r_.noalias() -= delta * sd_.x.col(j);
            beta_main_[js] = next;
            if (opts_.on_update) opts_.on_update(TermId::Main(j), old, next);
        }
        return std::abs(delta);
    }

    double update_pair(int idx) {
        const auto is = static_cast<std::size_t>(idx);
        const auto& pr = w_.pair(idx);
        const double old = beta_pair_[is];
        const double qq = q(idx);
        const double beta_hat = pair_dot(sd_, pr.j, pr.k, r_) / qq + old;
        const double c1 = group_remainder_fast(pr.j, idx, old);
        const double c2 = group_remainder_fast(pr.k, idx, old);
        const double alpha =
            interaction_shrinkage(beta_hat, cfg_.lambda1, cfg_.lambda2, pr.weight, qq, c1, c2, root_);
        const double next = alpha * beta_hat;
        const double delta = next - old;
        if (delta != 0.0) {
            r_.array() -= delta * sd_.x.col(pr.j).array() * sd_.x.col(pr.k).array();
            beta_pair_[is] = next;
            const double w2q = pr.weight * pr.weight * qq;
            const double dsq = w2q * (next * next - old * old);
            const int dnnz = (next != 0.0 ? 1 : 0) - (old != 0.0 ? 1 : 0);
            for (int s : {pr.j, pr.k}) {
                const auto ss = static_cast<std::size_t>(s);
                group_nnz_[ss] += dnnz;
                group_sq_[ss] = group_nnz_[ss] > 0 ? std::max(0.0, group_sq_[ss] + dsq) : 0.0;
            }
            if (opts_.on_update) opts_.on_update(TermId::Inter(pr.j, pr.k), old, next);
        }
        return std::abs(delta);
    }

    double total_group_sq(int j) const {
        const auto js = static_cast<std::size_t>(j);
        double g = group_sq_[js];
        if (w_.main_allowed(j)) g += w_.diag(j) * w_.diag(j) * x_norm2_[js] * beta_main_[js] * beta_main_[js];
        return g;
    }

    bool in_mask(int j) const {
        return opts_.snp_mask == nullptr || (*opts_.snp_mask)[static_cast<std::size_t>(j)] != 0;
    }

    // Joint optimality of every all-zero group. For such a group the
    // thresholded gradient s (main entry |g|/(w ||X||), pair entries
    // (|g|/(w ||X_jk||) - tau)_+ with tau = lambda2 + lambda1 [other row empty])
    // must satisfy ||s|| <= lambda1. The first violating group is moved along
    // s by an exact line search. Returns true when a move was made.
    bool escape_zero_groups() {
        recompute_groups();
        for (int j = 0; j < sd_.p(); ++j) {
            if (!in_mask(j) || total_group_sq(j) != 0.0) continue;
            GroupMove mv;
            mv.j = j;
            double norm2 = 0.0;
            const auto js = static_cast<std::size_t>(j);
            if (w_.main_allowed(j)) {
                const double scale = w_.diag(j) * std::sqrt(x_norm2_[js]);
                const double g = sd_.x.col(j).dot(r_);
                const double s = std::abs(g) / scale;
                mv.main_dir = std::copysign(s / scale, g);
                norm2 += s * s;
            }
            for (const auto& nb : w_.neighbors(j)) {
                if (!in_mask(nb.snp)) continue;
                const auto& pr = w_.pair(nb.pair_index);
                const double scale = pr.weight * std::sqrt(q(nb.pair_index));
                const double g = pair_dot(sd_, pr.j, pr.k, r_);
                const double other = total_group_sq(nb.snp);
                const double tau = cfg_.lambda2 + (other == 0.0 ? cfg_.lambda1 : 0.0);
                const double s = std::max(0.0, std::abs(g) / scale - tau);
                if (s == 0.0) continue;
                mv.pairs.push_back({nb.pair_index, std::copysign(s / scale, g), other});
                norm2 += s * s;
            }
            const double snorm = std::sqrt(norm2);
            if (snorm <= cfg_.lambda1 * (1.0 + 1e-7)) continue;
            mv.s_norm = snorm;
            if (apply_move(mv)) return true;
        }
        return false;
    }

    struct PairDir {
        int idx;
        double dir;
        double other_sq;  // squared group norm of the partner SNP
    };
    struct GroupMove {
        int j = 0;
        double main_dir = 0.0;
        std::vector<PairDir> pairs;
        double s_norm = 0.0;
    };

    bool apply_move(const GroupMove& mv) {
        Vector v = mv.main_dir * sd_.x.col(mv.j);
        for (const auto& pd : mv.pairs) {
            const auto& pr = w_.pair(pd.idx);
            v.array() += pd.dir * sd_.x.col(pr.j).array() * sd_.x.col(pr.k).array();
        }
        const double vr = v.dot(r_);
        const double vv = v.squaredNorm();
        if (!(vv > 0.0)) return false;
        // Derivative of the objective along t * d, increasing in t.
        auto slope = [&](double t) {
            double d = -vr + t * vv + cfg_.lambda1 * mv.s_norm;
            for (const auto& pd : mv.pairs) {
                const auto& pr = w_.pair(pd.idx);
                const double a = pr.weight * std::sqrt(q(pd.idx)) * std::abs(pd.dir);
                d += cfg_.lambda2 * a;
                d += pd.other_sq == 0.0 ? cfg_.lambda1 * a
                                        : cfg_.lambda1 * t * a * a / std::sqrt(pd.other_sq + t * t * a * a);
            }
            return d;
        };
        if (slope(0.0) >= 0.0) return false;
        double lo = 0.0, hi = 1.0;
        while (slope(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < 0.0 ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        if (!(t > 0.0)) return false;
        std::vector<std::pair<TermId, double>> moved;
        if (mv.main_dir != 0.0) {
            beta_main_[static_cast<std::size_t>(mv.j)] = t * mv.main_dir;
            moved.emplace_back(TermId::Main(mv.j), t * mv.main_dir);
        }
        for (const auto& pd : mv.pairs) {
            const auto& pr = w_.pair(pd.idx);
            beta_pair_[static_cast<std::size_t>(pd.idx)] = t * pd.dir;
            moved.emplace_back(TermId::Inter(pr.j, pr.k), t * pd.dir);
        }
        r_.noalias() -= t * v;
        recompute_groups();
        if (opts_.on_block_update) opts_.on_block_update(moved);
        return true;
    }

    double sweep(const std::vector<Coord>& order) {
        double max_change = 0.0;
        for (const auto& c : order) {
            const double d = c.main ? update_main(c.index) : update_pair(c.index);
            max_change = std::max(max_change, d);
        }
        return max_change;
    }

    CoefficientState coefficients() const {
        CoefficientState out;
        for (int j = 0; j < sd_.p(); ++j) out.set(TermId::Main(j), beta_main_[static_cast<std::size_t>(j)]);
        for (int idx = 0; idx < w_.pair_count(); ++idx) {
            const auto& pr = w_.pair(idx);
            out.set(TermId::Inter(pr.j, pr.k), beta_pair_[static_cast<std::size_t>(idx)]);
        }
        return out;
    }

    const StandardizedDesign& sd_;
    const WeightMatrix& w_;
    const SolverConfig& cfg_;
    const FitOptions& opts_;
    RootOptions root_;

    std::vector<Coord> coords_;
    std::vector<double> beta_main_;
    std::vector<double> beta_pair_;
    std::vector<double> pair_q_;  // ||X_jk||^2, memoized on first use
    std::vector<double> x_norm2_;
    std::vector<double> group_sq_;  // sum over nonzero pairs of w^2 ||X_jk||^2 beta^2
    std::vector<int> group_nnz_;
    Vector r_;
};

}  // namespace

double objective(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                 const CoefficientState& coeffs) {
    check_shapes(sd, w);
    const Vector r = sd.y - fitted(sd, coeffs);
    double value = 0.5 * r.squaredNorm();

    std::vector<double> group(static_cast<std::size_t>(sd.p()), 0.0);
    double pair_pen = 0.0;
    for (const auto& [t, b] : coeffs) {
        if (t.is_main()) {
            const int j = t.first();
            if (!w.main_allowed(j)) continue;
            group[static_cast<std::size_t>(j)] += w.diag(j) * w.diag(j) * sd.x.col(j).squaredNorm() * b * b;
        } else {
            const double wt = w.weight(t.first(), t.second());
            if (!std::isfinite(wt)) {
                throw Error(ErrorCode::ExcludedPair, "coefficient on an excluded pair");
            }
            const double sq = wt * wt * pair_norm2(sd, t.first(), t.second()) * b * b;
            group[static_cast<std::size_t>(t.first())] += sq;
            group[static_cast<std::size_t>(t.second())] += sq;
            pair_pen += std::sqrt(sq);
        }
    }
    double group_pen = 0.0;
    for (double g : group) group_pen += std::sqrt(g);
    return value + cfg.lambda1 * group_pen + cfg.lambda2 * pair_pen;
}

Vector partial_residual(const StandardizedDesign& sd, const CoefficientState& coeffs, const TermId& term) {
    CoefficientState others = coeffs;
    others.set(term, 0.0);
    return sd.y - fitted(sd, others);
}

double shrink_main(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                   const CoefficientState& coeffs, int j) {
    check_shapes(sd, w);
    if (j < 0 || j >= sd.p()) throw Error(ErrorCode::IndexOutOfRange, "SNP index out of range");
    if (!w.main_allowed(j)) return 0.0;
    const Vector r = partial_residual(sd, coeffs, TermId::Main(j));
    const double xn = sd.x.col(j).squaredNorm();
    const double beta_hat = sd.x.col(j).dot(r) / xn;
    const double c = group_remainder(sd, w, coeffs, j, -1);
    const double alpha =
        main_shrinkage(beta_hat, cfg.lambda1, w.diag(j), xn, c, RootOptions{cfg.nr_tol, cfg.nr_max_iter});
    return alpha * beta_hat;
}

double shrink_interaction(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
                          const CoefficientState& coeffs, int j, int k) {
    check_shapes(sd, w);
    const TermId term = TermId::Inter(j, k);
    const double wt = w.weight(j, k);
    if (!std::isfinite(wt)) throw Error(ErrorCode::ExcludedPair, "pair is excluded by the weight matrix");
    const Vector r = partial_residual(sd, coeffs, term);
    const double q = pair_norm2(sd, j, k);
    const double beta_hat = pair_dot(sd, j, k, r) / q;
    auto remainder = [&](int a, int b) {
        double c = group_remainder(sd, w, coeffs, a, b);
        if (w.main_allowed(a)) {
            const double ba = coeffs.get(TermId::Main(a));
            c += w.diag(a) * w.diag(a) * sd.x.col(a).squaredNorm() * ba * ba;
        }
        return c;
    };
    const double alpha = interaction_shrinkage(beta_hat, cfg.lambda1, cfg.lambda2, wt, q, remainder(j, k),
                                               remainder(k, j), RootOptions{cfg.nr_tol, cfg.nr_max_iter});
    return alpha * beta_hat;
}

Solution fit(const StandardizedDesign& sd, const WeightMatrix& w, const SolverConfig& cfg,
             const FitOptions& opts) {
    cfg.validate();
    check_shapes(sd, w);
    if (opts.snp_mask != nullptr && static_cast<int>(opts.snp_mask->size()) != sd.p()) {
        throw Error(ErrorCode::InvalidArgument, "SNP mask size does not match design");
    }
    CoordinateDescent cd(sd, w, cfg, opts);
    return cd.run();
}

}  // namespace netlasso
