#include "hanle/spin_algebra.hpp"

#include <cmath>
#include <cstdint>

namespace hanle {

namespace {

void check_twice_f(int twice_f) {
    if (twice_f < 1) throw invalid_parameter("spin_algebra: 2F must be a positive integer");
}

// Pascal-rule binomials; exact in uint64 up to n = 64.
std::uint64_t binomial_u64(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::vector<std::uint64_t> row(static_cast<size_t>(n) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = std::min(i, n / 2 + 1); j >= 1; --j) row[j] += row[j - 1];
    return row[k];
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

SublevelDistribution stretched_state_populations(int twice_f) {
    check_twice_f(twice_f);
    SublevelDistribution dist;
    dist.twice_f = twice_f;
    dist.populations.resize(static_cast<size_t>(twice_f) + 1);
    const int n = twice_f;
    if (n <= 64) {
        const double scale = std::ldexp(1.0, -n);  // exact 2^-2F
        for (int k = 0; k <= n; ++k)
            dist.populations[static_cast<size_t>(k)] =
                static_cast<double>(binomial_u64(n, k)) * scale;
    } else {
        const double log_scale = -n * std::log(2.0);
        for (int k = 0; k <= n; ++k)
            dist.populations[static_cast<size_t>(k)] = std::exp(log_binomial(n, k) + log_scale);
    }
    return dist;
}

double second_moment_x(int twice_f) {
    check_twice_f(twice_f);
    return 0.25 * twice_f;  // F/2
}

double quasi_alignment_moment(int twice_f) {
    check_twice_f(twice_f);
    const double f = 0.5 * twice_f;
    return -f * (2.0 * f - 1.0) / 2.0;
}

double normalized_projection_ratio(int twice_f) {
    check_twice_f(twice_f);
    const double f = 0.5 * twice_f;
    return -(2.0 * f - 1.0) / (2.0 * (f + 1.0));
}

}  // namespace hanle
