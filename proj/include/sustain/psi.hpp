#pragma once

// psi_h(k, v): probability that availability moves from k to v blocks when
// one more user holding h uniformly chosen blocks joins. Hypergeometric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sustain/error.hpp"
#include "sustain/model_params.hpp"

namespace sustain {

/// Support of psi_h(k, .): v in [max(k, h), min(B, k + h)].
struct PsiSupport {
    int lo;
    int hi;
};

inline PsiSupport psi_support(int B, int h, int k) {
    return {std::max(k, h), std::min(B, k + h)};
}

inline void check_psi_args(int B, int h, int k) {
    if (B < 1) throw ValidationError("psi: block count must be at least 1");
    if (h < 0 || h > B)
        throw ValidationError("psi: contributed block count h=" + std::to_string(h) +
                              " outside [0, " + std::to_string(B) + "]");
    if (k < 0 || k > B)
        throw ValidationError("psi: available block count k=" + std::to_string(k) +
                              " outside [0, " + std::to_string(B) + "]");
}

/// C(k, h-(v-k)) C(B-k, v-k) / C(B, h), via log-gamma.
inline double psi_direct(int B, int h, int k, int v) {
    check_psi_args(B, h, k);
    const auto [lo, hi] = psi_support(B, h, k);
    if (v < lo || v > hi) return 0.0;
    return std::exp(log_choose(k, h - (v - k)) + log_choose(B - k, v - k) - log_choose(B, h));
}

/// All psi_h(k, v) for h <= h_max, stored over their supports only.
class PsiKernel {
public:
    PsiKernel(int B, int h_max) : B_(B), h_max_(h_max) {
        if (B < 1) throw ValidationError("psi kernel: block count must be at least 1");
        if (h_max < 0 || h_max > B)
            throw ValidationError("psi kernel: h_max must lie in [0, B]");
        offsets_.resize(static_cast<std::size_t>(h_max + 1) * (B + 1) + 1);
        std::size_t off = 0;
        for (int h = 0; h <= h_max; ++h)
            for (int k = 0; k <= B; ++k) {
                offsets_[index(h, k)] = off;
                const auto [lo, hi] = psi_support(B, h, k);
                off += static_cast<std::size_t>(std::max(0, hi - lo + 1));
            }
        offsets_.back() = off;
        values_.assign(off, 0.0);
    }

    int blocks() const noexcept { return B_; }
    int h_max() const noexcept { return h_max_; }

    double operator()(int h, int k, int v) const {
        const auto [lo, hi] = psi_support(B_, h, k);
        if (v < lo || v > hi) return 0.0;
        return values_[offsets_[index(h, k)] + static_cast<std::size_t>(v - lo)];
    }

    /// psi_h(k, .) over its support, first entry at v = max(k, h).
    std::span<const double> row(int h, int k) const {
        const std::size_t i = index(h, k);
        return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::span<double> row(int h, int k) {
        const std::size_t i = index(h, k);
        return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

private:
    std::size_t index(int h, int k) const {
        return static_cast<std::size_t>(h) * (B_ + 1) + static_cast<std::size_t>(k);
    }

    int B_;
    int h_max_;
    std::vector<std::size_t> offsets_;
    std::vector<double> values_;
};

/// Fills the kernel by picking the user's blocks one at a time:
///   psi_h(k,v) = psi_{h-1}(k,v-1) (B-v+1)/(B-h+1) + psi_{h-1}(k,v) (v-h+1)/(B-h+1)
/// The h-th pick is new with probability (#unavailable)/(#not yet picked).
inline PsiKernel psi_recursive(int B, int h_max) {
    PsiKernel kernel(B, h_max);
    for (int k = 0; k <= B; ++k) kernel.row(0, k)[0] = 1.0;
    for (int h = 1; h <= h_max; ++h) {
        const double denom = static_cast<double>(B - h + 1);
        for (int k = 0; k <= B; ++k) {
            const auto [lo, hi] = psi_support(B, h, k);
            auto out = kernel.row(h, k);
            for (int v = lo; v <= hi; ++v) {
                const double fresh = kernel(h - 1, k, v - 1) * (B - v + 1) / denom;
                const double repeat = kernel(h - 1, k, v) * (v - h + 1) / denom;
                out[v - lo] = fresh + repeat;
            }
        }
    }
    return kernel;
}

/// Sum over h = max(0, v-k) .. B-1 of psi_h(k, v); equals (B+1)/(B-k+1)
/// for v < B and k/(B-k+1) for v = B.
inline double psi_tail_sum(int B, int k, int v) {
    if (k < 0 || v < k || v > B)
        throw ValidationError("psi_tail_sum: need 0 <= k <= v <= B");
    double sum = 0.0;
    for (int h = std::max(0, v - k); h <= B - 1; ++h) sum += psi_direct(B, h, k, v);
    return sum;
}

/// Right-hand side of the tail-sum identity.
inline double psi_tail_sum_identity(int B, int k, int v) {
    return v <= B - 1 ? static_cast<double>(B + 1) / (B - k + 1)
                      : static_cast<double>(k) / (B - k + 1);
}

}  // namespace sustain
