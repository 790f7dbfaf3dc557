#pragma once

namespace netlasso {

// Controls for the scalar shrinkage root-finder: safeguarded Newton-Raphson
// started at alpha = 0.5, falling back to bisection on [0, 1].
struct RootOptions {
    double tol = 1e-13;
    int max_newton_iter = 50;
};

/// Shrinkage factor alpha in [0, 1] for a main-effect update.
///
/// Solves alpha * (1 + lambda1 w^2 / sqrt(w^2 x alpha^2 beta_hat^2 + c)) = 1, where
/// `x_norm2` is ||X_j||^2 and `c` is the weighted squared norm of the SNP's
/// currently nonzero interactions. With c == 0 the soft-threshold closed form
/// (1 - lambda1 w / (sqrt(x) |beta_hat|))_+ is returned directly.
double main_shrinkage(double beta_hat, double lambda1, double w, double x_norm2, double c,
                      const RootOptions& opt = {});

/// Shrinkage factor alpha in [0, 1] for an interaction update.
///
/// The right-hand side is soft-thresholded by lambda2 w / sqrt(q) first
/// (q = ||X_jk||^2); a zero right-hand side gives alpha = 0. Otherwise the
/// two-group equation is solved, with `c1`, `c2` the remainders of the two
/// groups the pair belongs to. With c1 == c2 == 0 the closed form
/// (1 - (2 lambda1 + lambda2) w / (sqrt(q) |beta_hat|))_+ is used.
double interaction_shrinkage(double beta_hat, double lambda1, double lambda2, double w, double q,
                             double c1, double c2, const RootOptions& opt = {});

}  // namespace netlasso
