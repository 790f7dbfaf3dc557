#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace netlasso {

double normal_cdf(double z);
// Inverse of normal_cdf; p in (0, 1).
double normal_quantile(double p);
// Two-sided p-value of a t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);
// Two-sided p-value of a standard normal statistic.
double z_two_sided_p(double z);

// Natural-log versions that stay accurate far past double underflow.
double t_two_sided_log_p(double t, double df);
double z_two_sided_log_p(double z);

double bonferroni(double p, std::size_t m);
double bonferroni_log(double log_p, std::size_t m);
// sign * Phi^{-1}(1 - p/2); 0 when p == 1.
double signed_z_from_p(double p, double sign);
double signed_z_from_log_p(double log_p, double sign);
// Z -> two-sided p -> Bonferroni over m -> signed Z.
double bonferroni_round_trip(double z, std::size_t m);

// Deterministic child seed for work unit (a, b) of a run seeded with `seed`.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Worker count: explicit value if > 0, else NETLASSO_THREADS, else hardware.
int resolve_threads(int requested = 0);

// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace netlasso
