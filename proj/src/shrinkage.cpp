#include "netlasso/shrinkage.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "netlasso/error.hpp"

namespace netlasso {
namespace {

// phi(alpha) = alpha*B + lambda1 w^2 sum_i T_i(alpha) - R, strictly increasing
// on (0, 1]. T_i(alpha) = alpha B / sqrt(w^2 q alpha^2 B^2 + c_i); for c_i == 0
// it is the constant 1 / (w sqrt(q)).
struct GroupEquation {
    double b;        // |beta_hat|
    double lambda1;
    double w;
    double q;
    double rhs;
    std::array<double, 2> c;
    int groups;

    double value(double alpha) const {
        double pen = 0.0;
        const double ab = alpha * b;
        for (int i = 0; i < groups; ++i) {
            pen += c[i] == 0.0 ? 1.0 / (w * std::sqrt(q)) : ab / std::sqrt(w * w * q * ab * ab + c[i]);
        }
        return ab + lambda1 * w * w * pen - rhs;
    }

    double slope(double alpha) const {
        double d = 0.0;
        const double ab = alpha * b;
        for (int i = 0; i < groups; ++i) {
            if (c[i] == 0.0) continue;
            const double s = w * w * q * ab * ab + c[i];
            d += b * c[i] / (s * std::sqrt(s));
        }
        return b + lambda1 * w * w * d;
    }

    // value at alpha -> 0+
    double at_zero() const {
        double pen = 0.0;
        for (int i = 0; i < groups; ++i) {
            if (c[i] == 0.0) pen += 1.0 / (w * std::sqrt(q));
        }
        return lambda1 * w * w * pen - rhs;
    }
};

double solve(const GroupEquation& eq, const RootOptions& opt) {
    if (eq.at_zero() >= 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    double alpha = 0.5;
    int newton_iter = 0;
    // Newton while it behaves; bisection whenever the iterate leaves the
    // bracket or stalls. Monotonicity of phi keeps the bracket valid.
    for (int guard = 0; guard < 400; ++guard) {
        const double f = eq.value(alpha);
        if (f == 0.0) return alpha;
        if (f > 0.0) {
            hi = alpha;
        } else {
            lo = alpha;
        }
        if (hi - lo <= opt.tol) break;
        double next = 0.5 * (lo + hi);
        if (newton_iter < opt.max_newton_iter) {
            ++newton_iter;
            const double d = eq.slope(alpha);
            const double step = d > 0.0 ? alpha - f / d : next;
            if (step > lo && step < hi) {
                if (std::abs(step - alpha) <= opt.tol * 0.5) return step;
                next = step;
            }
        }
        alpha = next;
    }
    return 0.5 * (lo + hi);
}

// Group remainders below this fraction (in squared norm) of the candidate's
// own weighted size are treated as zero. Without the cut, two coefficients
// of order 1e-15 can keep each other's group alive indefinitely.
constexpr double kNegligibleGroup = 1e-20;

double effective_c(double c, double own_sq) { return c <= kNegligibleGroup * own_sq ? 0.0 : c; }

void check_finite(std::initializer_list<double> vals) {
    for (double v : vals) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite shrinkage input");
    }
}

}  // namespace

double main_shrinkage(double beta_hat, double lambda1, double w, double x_norm2, double c,
                      const RootOptions& opt) {
    check_finite({beta_hat, lambda1, w, x_norm2, c});
    const double b = std::abs(beta_hat);
    if (b == 0.0) return 0.0;
    c = effective_c(c, w * w * x_norm2 * b * b);
    if (c <= 0.0) {
        return std::max(0.0, 1.0 - lambda1 * w / (std::sqrt(x_norm2) * b));
    }
    const GroupEquation eq{b, lambda1, w, x_norm2, b, {c, 0.0}, 1};
    return solve(eq, opt);
}

double interaction_shrinkage(double beta_hat, double lambda1, double lambda2, double w, double q,
                             double c1, double c2, const RootOptions& opt) {
    check_finite({beta_hat, lambda1, lambda2, w, q, c1, c2});
    const double b = std::abs(beta_hat);
    if (b == 0.0) return 0.0;
    const double rhs = std::max(0.0, b - lambda2 * w / std::sqrt(q));
    if (rhs == 0.0) return 0.0;
    c1 = effective_c(std::max(c1, 0.0), w * w * q * b * b);
    c2 = effective_c(std::max(c2, 0.0), w * w * q * b * b);
    if (c1 == 0.0 && c2 == 0.0) {
        return std::max(0.0, 1.0 - (2.0 * lambda1 + lambda2) * w / (std::sqrt(q) * b));
    }
    const GroupEquation eq{b, lambda1, w, q, rhs, {c1, c2}, 2};
    return solve(eq, opt);
}

}  // namespace netlasso
