#pragma once

// p_n(v): probability that v blocks are available among the peers given n
// users in the system. Three routes:
//   cond_avail_lemma        O(N B^3) reference, mixes psi over a uniform stage
//   cond_avail_fast         O(N B) recursion, seeds leave immediately
//   cond_avail_fast_seeded  O(N B) recursion, seeds leave at rate mu
// plus cond_dist_given_stages, the exact law for one fixed stage vector.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sustain/error.hpp"
#include "sustain/model_params.hpp"
#include "sustain/psi.hpp"

namespace sustain {

class CondAvailTable {
public:
    CondAvailTable(int B, int N, GammaMode mode)
        : B_(B), N_(N), mode_(mode),
          p_(static_cast<std::size_t>(N + 1) * (B + 1), 0.0) {
        if (B < 1) throw ValidationError("conditional table: block count must be at least 1");
        if (N < 0) throw ValidationError("conditional table: population bound must be >= 0");
        p_[0] = 1.0;
    }

    int blocks() const noexcept { return B_; }
    int max_users() const noexcept { return N_; }
    GammaMode mode() const noexcept { return mode_; }

    double operator()(int n, int v) const { return p_[at(n, v)]; }
    double& operator()(int n, int v) { return p_[at(n, v)]; }

    std::span<const double> row(int n) const {
        return {p_.data() + at(n, 0), static_cast<std::size_t>(B_ + 1)};
    }

private:
    std::size_t at(int n, int v) const {
        return static_cast<std::size_t>(n) * (B_ + 1) + static_cast<std::size_t>(v);
    }

    int B_;
    int N_;
    GammaMode mode_;
    std::vector<double> p_;
};

inline void check_table_args(int B, int N) {
    if (B < 1) throw ValidationError("block count must be at least 1");
    if (N < 0) throw ValidationError("population bound N must be >= 0");
}

/// p_n(v) = sum_h sum_k p_{n-1}(k) psi_h(k, v) / B, the newest user sitting
/// in a uniformly chosen stage h in [0, B-1]. Oracle grade: O(N B^3).
inline CondAvailTable cond_avail_lemma(int B, int N) {
    check_table_args(B, N);
    CondAvailTable t(B, N, GammaMode::Infinite);
    const PsiKernel psi = psi_recursive(B, B - 1);
    for (int n = 1; n <= N; ++n) {
        for (int v = 0; v <= B; ++v) {
            double acc = 0.0;
            for (int h = 0; h <= std::min(v, B - 1); ++h)
                for (int k = v - h; k <= v; ++k) acc += t(n - 1, k) * psi(h, k, v);
            t(n, v) = acc / B;
        }
    }
    return t;
}

/// Rounding floor for the complement entry p_n(B).
inline constexpr double kComplementSlack = 1e-9;

inline double clamp_complement(double value, int n) {
    if (value < -kComplementSlack)
        throw std::logic_error("complement p_" + std::to_string(n) +
                               "(B) = " + std::to_string(value) + " is below rounding slack");
    return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
}

/// p_n(0) = B^-n;  p_n(v) = p_n(v-1) + p_{n-1}(v) (B+1)/(B(B-v+1)), 0 < v < B;
/// p_n(B) is the complement.
inline CondAvailTable cond_avail_fast(int B, int N) {
    check_table_args(B, N);
    CondAvailTable t(B, N, GammaMode::Infinite);
    const double inv_B = 1.0 / B;
    double base = 1.0;
    for (int n = 1; n <= N; ++n) {
        base *= inv_B;
        t(n, 0) = base;
        double partial = base;
        for (int v = 1; v < B; ++v) {
            t(n, v) = t(n, v - 1) + t(n - 1, v) * (B + 1.0) / (static_cast<double>(B) * (B - v + 1));
            partial += t(n, v);
        }
        t(n, B) = clamp_complement(1.0 - partial, n);
    }
    return t;
}

inline constexpr double kRowSumTolerance = 1e-10;

/// Seeds linger at the block rate: p_n(0) = (B+1)^-n,
/// p_n(v) = p_n(v-1) + p_{n-1}(v)/(B-v+1) for 0 < v <= B. Rows close exactly.
inline CondAvailTable cond_avail_fast_seeded(int B, int N) {
    check_table_args(B, N);
    CondAvailTable t(B, N, GammaMode::EqualMu);
    const double inv = 1.0 / (B + 1.0);
    double base = 1.0;
    for (int n = 1; n <= N; ++n) {
        base *= inv;
        t(n, 0) = base;
        double sum = base;
        for (int v = 1; v <= B; ++v) {
            t(n, v) = t(n, v - 1) + t(n - 1, v) / (B - v + 1.0);
            sum += t(n, v);
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
            throw std::logic_error("seeded recursion row " + std::to_string(n) +
                                   " sums to " + std::to_string(sum));
    }
    return t;
}

/// Exact P(V = v | N = n) for one stage vector n_0..n_B, by adding users one
/// at a time through psi. Order does not matter.
inline std::vector<double> cond_dist_given_stages(int B, std::span<const int> stage_counts) {
    if (B < 1) throw ValidationError("block count must be at least 1");
    if (static_cast<int>(stage_counts.size()) > B + 1)
        throw ValidationError("stage vector longer than B+1");
    std::vector<double> dist(B + 1, 0.0), next(B + 1);
    dist[0] = 1.0;
    for (int h = 0; h < static_cast<int>(stage_counts.size()); ++h) {
        if (stage_counts[h] < 0) throw ValidationError("stage counts must be nonnegative");
        for (int u = 0; u < stage_counts[h]; ++u) {
            std::fill(next.begin(), next.end(), 0.0);
            for (int k = 0; k <= B; ++k) {
                if (dist[k] == 0.0) continue;
                const auto [lo, hi] = psi_support(B, h, k);
                for (int v = lo; v <= hi; ++v) next[v] += dist[k] * psi_direct(B, h, k, v);
            }
            dist.swap(next);
        }
    }
    return dist;
}

}  // namespace sustain
