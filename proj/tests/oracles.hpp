#pragma once

// Test-side reference values computed without the library's code paths:
// long double products for binomials, explicit enumeration for mixtures.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline long double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0L;
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Availability k -> v when one user adds h uniformly chosen distinct blocks.
inline long double psi(int B, int h, int k, int v) {
    const int fresh = v - k;
    return binom(k, h - fresh) * binom(B - k, fresh) / binom(B, h);
}

/// P(V = v | n users), every user independently in a uniform stage among
/// `stages` (0..B-1 for immediate departure, 0..B with seeds at rate mu).
inline std::vector<long double> cond_by_enumeration(int B, int n, int stages) {
    std::vector<long double> out(B + 1, 0.0L);
    std::vector<long double> dist(B + 1, 0.0L);
    std::function<void(int, std::vector<long double>)> rec = [&](int left, std::vector<long double> cur) {
        if (left == 0) {
            for (int v = 0; v <= B; ++v) out[v] += cur[v];
            return;
        }
        for (int h = 0; h < stages; ++h) {
            std::vector<long double> next(B + 1, 0.0L);
            for (int k = 0; k <= B; ++k)
                if (cur[k] != 0.0L)
                    for (int v = k; v <= B; ++v) next[v] += cur[k] * psi(B, h, k, v) / stages;
            rec(left - 1, next);
        }
    };
    dist[0] = 1.0L;
    rec(n, dist);
    return out;
}

inline long double poisson_pmf(long double mean, int n) {
    if (mean == 0.0L) return n == 0 ? 1.0L : 0.0L;
    return std::exp(-mean + n * std::log(mean) - std::lgamma(static_cast<long double>(n) + 1.0L));
}

}  // namespace oracle
