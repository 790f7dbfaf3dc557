#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace oracle {

// sqrt(a + c) - sqrt(c) without cancellation.
inline double sqrt_gain(double a, double c) { return a / (std::sqrt(a + c) + std::sqrt(c)); }

// Minimizes a convex function of alpha on [0, 1] with successively finer grids
// (1e-3, then 1e-5, then 1e-7 around the incumbent).
inline double grid_argmin(const std::function<double(double)>& f) {
    double best = 0.0;
    double lo = 0.0, hi = 1.0;
    for (double step : {1e-3, 1e-5, 1e-7}) {
        double best_val = std::numeric_limits<double>::infinity();
        const long steps = static_cast<long>(std::llround((hi - lo) / step));
        for (long i = 0; i <= steps; ++i) {
            const double a = std::min(1.0, lo + static_cast<double>(i) * step);
            const double v = f(a);
            if (v < best_val) {
                best_val = v;
                best = a;
            }
        }
        lo = std::max(0.0, best - 2.0 * step);
        hi = std::min(1.0, best + 2.0 * step);
    }
    return best;
}

// Scalar main-effect problem in alpha, relative to beta = 0:
// 1/2 x (a b)^2 - x a b b + lambda1 (sqrt(w^2 x a^2 b^2 + c) - sqrt(c)).
inline double main_alpha(double beta_hat, double lambda1, double w, double x, double c) {
    return grid_argmin([&](double a) {
        const double b = a * beta_hat;
        return 0.5 * x * b * b - x * b * beta_hat + lambda1 * sqrt_gain(w * w * x * b * b, c);
    });
}

inline double interaction_alpha(double beta_hat, double lambda1, double lambda2, double w, double q, double c1,
                                double c2) {
    return grid_argmin([&](double a) {
        const double b = a * beta_hat;
        const double s = w * w * q * b * b;
        return 0.5 * q * b * b - q * b * beta_hat + lambda1 * (sqrt_gain(s, c1) + sqrt_gain(s, c2)) +
               lambda2 * w * std::sqrt(q) * std::abs(b);
    });
}

// Root of a strictly increasing function on [0, 1] by plain bisection.
inline double bisect(const std::function<double(double)>& phi, double tol = 1e-14) {
    double lo = 0.0, hi = 1.0;
    if (phi(1e-300) >= 0.0) return 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// Classical OLS with intercept via the normal equations: returns (beta, se).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows(), m = x.cols();
    Eigen::MatrixXd d(n, m + 1);
    d.col(0).setOnes();
    d.rightCols(m) = x;
    const Eigen::MatrixXd xtx_inv = (d.transpose() * d).inverse();
    const Eigen::VectorXd coef = xtx_inv * d.transpose() * y;
    const double s2 = (y - d * coef).squaredNorm() / static_cast<double>(n - m - 1);
    Eigen::VectorXd se = (s2 * xtx_inv.diagonal()).cwiseSqrt();
    return {coef.tail(m), se.tail(m)};
}

}  // namespace oracle
