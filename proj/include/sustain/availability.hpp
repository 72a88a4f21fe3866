#pragma once

// Unconditional availability distribution p(v): the conditional tables mixed
// over the Poisson law of the total population, plus the per-stage engine for
// heterogeneous block download rates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sustain/cond_avail.hpp"
#include "sustain/error.hpp"
#include "sustain/model_params.hpp"
#include "sustain/psi.hpp"

namespace sustain {

class AvailDist {
public:
    AvailDist() = default;
    AvailDist(int B, std::vector<double> p, double trunc_error, long N, std::optional<GammaMode> mode)
        : B_(B), p_(std::move(p)), A_(p_.back()), trunc_error_(trunc_error), N_(N), mode_(mode) {}

    /// Self-sustainability only; the full law is not available for this gamma.
    static AvailDist self_sustainability_only(int B, double A, double trunc_error, long N) {
        AvailDist d;
        d.B_ = B;
        d.A_ = A;
        d.trunc_error_ = trunc_error;
        d.N_ = N;
        return d;
    }

    int blocks() const noexcept { return B_; }
    bool has_distribution() const noexcept { return !p_.empty(); }

    /// p(v), v = 0..B.
    std::span<const double> p() const {
        if (p_.empty())
            throw CapabilityError(
                "the full availability distribution is only known for gamma=inf and gamma=mu; "
                "only self-sustainability is available for a general finite gamma");
        return p_;
    }

    double self_sustainability() const noexcept { return A_; }
    double trunc_error() const noexcept { return trunc_error_; }
    /// Population (or per-stage) truncation point used.
    long truncation() const noexcept { return N_; }
    std::optional<GammaMode> mode() const noexcept { return mode_; }

    double mean() const {
        const auto probs = p();
        double m = 0.0;
        for (int v = 0; v <= B_; ++v) m += v * probs[v];
        return m;
    }

private:
    int B_ = 0;
    std::vector<double> p_;
    double A_ = 0.0;
    double trunc_error_ = 0.0;
    long N_ = 0;
    std::optional<GammaMode> mode_;
};

/// Mix p_n(.) with Poisson(mean) weights for n = 0..N.
inline std::vector<double> mix_over_population(const CondAvailTable& table, double mean) {
    const int B = table.blocks();
    std::vector<double> p(B + 1, 0.0);
    for (int n = 0; n <= table.max_users(); ++n) {
        const double w = poisson_pmf(mean, n);
        if (w == 0.0) continue;
        const auto row = table.row(n);
        for (int v = 0; v <= B; ++v) p[v] += w * row[v];
    }
    return p;
}

inline AvailDist het_avail_fast(const ModelParams& params, int M);
inline int default_stage_truncation(const ModelParams& params, double eta);

/// Availability law for homogeneous block rates.
///   gamma=inf: cond_avail_fast mixed with Poisson(B rho)
///   gamma=mu : cond_avail_fast_seeded mixed with Poisson((B+1) rho)
///   other    : A = 1 - (1 - A_inf) e^{-lambda/gamma}, no full law
/// A per-block rate vector (gamma=inf only) is routed to het_avail_fast.
inline AvailDist avail_distribution(const ModelParams& params, double eta = kDefaultEta) {
    const LoadProfile load = validate(params);
    const int B = params.blocks;

    if (!params.homogeneous()) {
        if (!params.gamma.is_infinite())
            throw CapabilityError("per-block download rates are only supported with gamma=inf");
        return het_avail_fast(params, default_stage_truncation(params, eta));
    }

    if (params.seeds_at_block_rate()) {
        const double mean = (B + 1) * load.rho;
        const long N = choose_truncation(mean, eta);
        const auto table = cond_avail_fast_seeded(B, static_cast<int>(N));
        return AvailDist(B, mix_over_population(table, mean), poisson_upper_tail(mean, N), N,
                         GammaMode::EqualMu);
    }

    const double mean = B * load.rho;
    const long N = choose_truncation(mean, eta);
    const auto table = cond_avail_fast(B, static_cast<int>(N));
    AvailDist inf(B, mix_over_population(table, mean), poisson_upper_tail(mean, N), N,
                  GammaMode::Infinite);
    if (params.gamma.is_infinite()) return inf;

    const double A = 1.0 - (1.0 - inf.self_sustainability()) * std::exp(-params.lambda / params.gamma.value());
    return AvailDist::self_sustainability_only(B, A, inf.trunc_error(), N);
}

// --- heterogeneous block download rates ------------------------------------

inline void check_het_args(const ModelParams& params, int M) {
    validate(params);
    if (params.homogeneous())
        throw ValidationError(
            "het_avail needs one download rate per block; use avail_distribution for a scalar mu");
    if (!params.gamma.is_infinite())
        throw ValidationError("het_avail supports gamma=inf only");
    if (M < 0) throw ValidationError("per-stage truncation M must be >= 0");
}

/// Per-stage truncation so that the union of the stage tails stays within eta.
inline int default_stage_truncation(const ModelParams& params, double eta) {
    double max_mean = 0.0;
    for (int h = 0; h < params.blocks; ++h) max_mean = std::max(max_mean, params.stage_mean(h));
    return static_cast<int>(choose_truncation(max_mean, eta / params.blocks));
}

namespace detail {

/// One more stage-h user on a (sub-)probability vector, direct O(B h) sum.
inline void apply_psi_direct(int B, int h, std::span<const double> in, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i <= B; ++i) {
        if (in[i] == 0.0) continue;
        const auto [lo, hi] = psi_support(B, h, i);
        for (int v = lo; v <= hi; ++v) out[v] += in[i] * psi_direct(B, h, i, v);
    }
}

/// Same step as a convolution. With a^(i) = a(i) / C(B,i) and c(j) = C(h,j),
///   a'(v) = (a^ * c)(v) C(B,v) C(v,h) / C(B,h),   h <= v < B,
/// and a'(B) closes the mass. Factors carry a common log shift so that the
/// scaled vectors stay in range for large B.
class PsiConvolver {
public:
    explicit PsiConvolver(int B) : B_(B), lf_(B) {}

    void apply(int h, std::span<const double> in, std::span<double> out) const {
        const int B = B_;
        double mass = 0.0;
        for (double x : in) mass += x;

        // Shift so the largest scaled entry is 1; entries far below it may
        // underflow, which only drops relatively negligible mass.
        double top = -std::numeric_limits<double>::infinity();
        std::vector<double> log_w(B + 1, -std::numeric_limits<double>::infinity());
        for (int i = 0; i <= B; ++i)
            if (in[i] > 0.0) {
                log_w[i] = std::log(in[i]) - lf_.choose(B, i);
                top = std::max(top, log_w[i]);
            }
        std::vector<double> scaled(B + 1, 0.0);
        if (top == -std::numeric_limits<double>::infinity()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        for (int i = 0; i <= B; ++i)
            if (in[i] > 0.0) scaled[i] = std::exp(log_w[i] - top);

        const double mid = lf_.choose(h, h / 2);
        std::vector<double> kernel(h + 1);
        for (int j = 0; j <= h; ++j) kernel[j] = std::exp(lf_.choose(h, j) - mid);

        std::fill(out.begin(), out.end(), 0.0);
        double below_full = 0.0;
        for (int v = h; v < B; ++v) {
            double acc = 0.0;
            for (int j = std::max(0, v - B); j <= std::min(h, v); ++j) acc += scaled[v - j] * kernel[j];
            if (acc == 0.0) continue;
            out[v] = acc * std::exp(lf_.choose(B, v) + lf_.choose(v, h) - lf_.choose(B, h) + top + mid);
            below_full += out[v];
        }
        out[B] = std::max(0.0, mass - below_full);
    }

private:
    int B_;
    LogFactorials lf_;
};

template <typename Step>
AvailDist het_stage_recursion(const ModelParams& params, int M, Step&& step) {
    const int B = params.blocks;
    // a holds the law of V given all users sit in stages > h (mixed over them).
    std::vector<double> a(B + 1, 0.0), cur(B + 1), nxt(B + 1), acc(B + 1);
    a[0] = 1.0;
    double tail = 0.0;
    for (int h = B - 1; h >= 1; --h) {
        const double mean = params.stage_mean(h);
        std::fill(acc.begin(), acc.end(), 0.0);
        cur = a;
        for (int r = 0; r <= M; ++r) {
            if (r > 0) {
                step(h, cur, nxt);
                cur.swap(nxt);
            }
            const double w = poisson_pmf(mean, r);
            for (int v = 0; v <= B; ++v) acc[v] += w * cur[v];
        }
        tail += poisson_upper_tail(mean, M);
        a = acc;
    }
    // Stage-0 users hold nothing, so mixing over them leaves a unchanged.
    return AvailDist(B, std::move(a), std::min(1.0, tail), M, GammaMode::Infinite);
}

}  // namespace detail

/// Stage-by-stage recursion from the last download stage back to stage 0,
/// with each stage occupancy ~ Poisson(lambda / mu_{h+1}) truncated at M. O(B^3 M).
inline AvailDist het_avail(const ModelParams& params, int M) {
    check_het_args(params, M);
    const int B = params.blocks;
    return detail::het_stage_recursion(params, M, [B](int h, std::span<const double> in, std::span<double> out) {
        detail::apply_psi_direct(B, h, in, out);
    });
}

/// het_avail with each psi step computed as a scaled convolution.
inline AvailDist het_avail_fast(const ModelParams& params, int M) {
    check_het_args(params, M);
    const detail::PsiConvolver conv(params.blocks);
    return detail::het_stage_recursion(params, M, [&conv](int h, std::span<const double> in, std::span<double> out) {
        conv.apply(h, in, out);
    });
}

}  // namespace sustain
