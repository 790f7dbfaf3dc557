#include "netlasso/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "netlasso/error.hpp"

namespace netlasso {

namespace bm = boost::math;

double normal_cdf(double z) { return bm::cdf(bm::normal_distribution<>(), z); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must be in (0, 1)");
    return bm::quantile(bm::normal_distribution<>(), p);
}

double t_two_sided_p(double t, double df) {
    if (std::isinf(t)) return 0.0;
    if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
    return 2.0 * bm::cdf(bm::complement(bm::students_t_distribution<>(df), std::abs(t)));
}

double z_two_sided_p(double z) {
    if (std::isinf(z)) return 0.0;
    return 2.0 * bm::cdf(bm::complement(bm::normal_distribution<>(), std::abs(z)));
}

double bonferroni(double p, std::size_t m) { return std::min(1.0, p * static_cast<double>(std::max<std::size_t>(m, 1))); }

namespace {

// Below this, tail probabilities are taken from the asymptotic forms instead
// of Boost (which underflows around |z| ~ 38).
constexpr double kTailFloor = 1e-290;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// log Q(z) for large z: Mills-ratio series.
double normal_log_tail_asymptotic(double z) {
    const double z2 = z * z;
    return -0.5 * z2 - std::log(z) - kLogSqrt2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

}  // namespace

double z_two_sided_log_p(double z) {
    if (std::isinf(z)) return -std::numeric_limits<double>::infinity();
    const double p = z_two_sided_p(z);
    if (p > kTailFloor) return std::log(p);
    return std::log(2.0) + normal_log_tail_asymptotic(std::abs(z));
}

double t_two_sided_log_p(double t, double df) {
    if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
    const double p = t_two_sided_p(t, df);
    if (p > kTailFloor) return std::log(p);
    // Laplace approximation of the upper tail: f(t) (df + t^2) / ((df + 1) t).
    const double a = std::abs(t);
    const double log_f = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi) -
                         0.5 * (df + 1.0) * std::log1p(a * a / df);
    return std::log(2.0) + log_f + std::log(df + a * a) - std::log((df + 1.0) * a);
}

double signed_z_from_log_p(double log_p, double sign) {
    if (log_p >= 0.0 || sign == 0.0) return 0.0;
    // p == 0 (infinite statistics) maps to a large finite Z.
    log_p = std::max(log_p, -1e6);
    double z;
    if (log_p > std::log(kTailFloor)) {
        z = -bm::quantile(bm::normal_distribution<>(), 0.5 * std::exp(log_p));
    } else {
        // Invert the asymptotic tail by bisection; it is decreasing in z.
        double lo = 30.0, hi = 60.0;
        while (std::log(2.0) + normal_log_tail_asymptotic(hi) > log_p) hi *= 2.0;
        for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (std::log(2.0) + normal_log_tail_asymptotic(mid) > log_p ? lo : hi) = mid;
        }
        z = 0.5 * (lo + hi);
    }
    return sign > 0.0 ? z : -z;
}

double signed_z_from_p(double p, double sign) {
    if (p >= 1.0 || sign == 0.0) return 0.0;
    return signed_z_from_log_p(p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(), sign);
}

double bonferroni_log(double log_p, std::size_t m) {
    return std::min(0.0, log_p + std::log(static_cast<double>(std::max<std::size_t>(m, 1))));
}

double bonferroni_round_trip(double z, std::size_t m) {
    if (z == 0.0) return 0.0;
    return signed_z_from_log_p(bonferroni_log(z_two_sided_log_p(z), m), z);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer applied to a combination of the inputs
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NETLASSO_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads) {
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace netlasso
