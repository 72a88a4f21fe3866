#pragma once

// Closed forms, moments, bounds and design formulas.
//
// The alternating binomial sums below cancel catastrophically as B grows, so
// they are accumulated in the widest native float with Neumaier compensation
// and refused past kClosedFormStableBlocks. The recursions in cond_avail.hpp
// have no such limit.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#if defined(__SIZEOF_FLOAT128__) && !defined(SUSTAIN_NO_FLOAT128)
#include <quadmath.h>
#define SUSTAIN_HAVE_FLOAT128 1
#endif

#include "sustain/availability.hpp"
#include "sustain/error.hpp"
#include "sustain/model_params.hpp"

namespace sustain {

#if defined(SUSTAIN_HAVE_FLOAT128)
using WideFloat = __float128;
inline WideFloat wide_exp(WideFloat x) { return expq(x); }
/// Largest B at which every closed form agrees with its recursion to 1e-7.
inline constexpr int kClosedFormStableBlocks = 63;
#else
using WideFloat = long double;
inline WideFloat wide_exp(WideFloat x) { return std::exp(x); }
inline constexpr int kClosedFormStableBlocks = 28;
#endif

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(WideFloat x) {
        const WideFloat t = sum_ + x;
        if (magnitude(sum_) >= magnitude(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    WideFloat value() const { return sum_ + comp_; }

private:
    static WideFloat magnitude(WideFloat x) { return x < 0 ? -x : x; }
    WideFloat sum_ = 0;
    WideFloat comp_ = 0;
};

/// Exact binomial coefficient (fits for every n up to the stable range).
inline WideFloat binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 c = 1;
    for (int i = 1; i <= k; ++i) c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    return static_cast<WideFloat>(c);
}

/// x^-n by squaring.
inline WideFloat inverse_power(WideFloat x, int n) {
    WideFloat result = 1, base = x;
    for (unsigned e = static_cast<unsigned>(n); e != 0; e >>= 1) {
        if (e & 1u) result *= base;
        base *= base;
    }
    return 1 / result;
}

inline void check_stable(int B, const char* what) {
    if (B < 1) throw ValidationError(std::string(what) + ": block count must be at least 1");
    if (B > kClosedFormStableBlocks)
        throw PrecisionError(std::string(what) + ": B=" + std::to_string(B) +
                             " exceeds the closed-form stable range (B <= " +
                             std::to_string(kClosedFormStableBlocks) +
                             "); use the recursions (cond_avail_fast*/avail_distribution) instead");
}

/// C(B,v) sum_l C(v,l) (-1)^l (B-v+l+1)^-n
inline WideFloat seeded_alternating_sum(int B, int n, int v) {
    CompensatedSum sum;
    for (int l = 0; l <= v; ++l) {
        WideFloat term = binomial(v, l) * inverse_power(static_cast<WideFloat>(B - v + l + 1), n);
        sum.add((l & 1) ? -term : term);
    }
    return binomial(B, v) * sum.value();
}

}  // namespace detail

inline void check_closed_args(int B, int n, int v, const char* what) {
    detail::check_stable(B, what);
    if (n < 1) throw ValidationError(std::string(what) + ": needs n >= 1 users");
    if (v < 0 || v > B) throw ValidationError(std::string(what) + ": v outside [0, B]");
}

/// p_n(v; mu) = C(B,v) sum_{l=0}^{v} C(v,l) (-1)^l (B-v+l+1)^{-n}
inline double cond_avail_closed_seeded(int B, int n, int v) {
    check_closed_args(B, n, v, "cond_avail_closed_seeded");
    return static_cast<double>(detail::seeded_alternating_sum(B, n, v));
}

/// Seeds leave at once: ((B+1)/B)^n times the seeded sum for v < B, and the
/// complement at v = B.
inline double cond_avail_closed_inf(int B, int n, int v) {
    check_closed_args(B, n, v, "cond_avail_closed_inf");
    const WideFloat growth = 1 / detail::inverse_power(static_cast<WideFloat>(B + 1) / B, n);
    if (v < B) return static_cast<double>(growth * detail::seeded_alternating_sum(B, n, v));
    detail::CompensatedSum below;
    for (int w = 0; w < B; ++w) below.add(growth * detail::seeded_alternating_sum(B, n, w));
    const double rest = static_cast<double>(1 - below.value());
    return rest < 0.0 ? 0.0 : rest;
}

/// p(B; mu) = sum_{l=0}^{B} C(B,l) (-1)^l exp(-(B+1) rho l / (l+1))
inline double self_sust_closed_seeded(int B, double rho) {
    detail::check_stable(B, "self_sust_closed_seeded");
    if (!(rho >= 0.0)) throw ValidationError("self_sust_closed_seeded: rho must be >= 0");
    detail::CompensatedSum sum;
    const WideFloat scale = static_cast<WideFloat>(B + 1) * static_cast<WideFloat>(rho);
    for (int l = 0; l <= B; ++l) {
        const WideFloat term = detail::binomial(B, l) * wide_exp(-scale * l / (l + 1));
        sum.add((l & 1) ? -term : term);
    }
    const double a = static_cast<double>(sum.value());
    return a < 0.0 ? 0.0 : (a > 1.0 ? 1.0 : a);
}

struct TaggedBlockProb {
    int blocks;
    double rho;
    int tagged;
    double prob;
};

/// Probability that l fixed blocks are all unavailable (gamma = mu):
/// exp(-rho l (B+1)/(l+1)).
inline TaggedBlockProb tagged_unavail_prob(int B, double rho, int l) {
    if (B < 1) throw ValidationError("tagged_unavail_prob: block count must be at least 1");
    if (l < 0 || l > B) throw ValidationError("tagged_unavail_prob: need 0 <= l <= B");
    if (!(rho >= 0.0)) throw ValidationError("tagged_unavail_prob: rho must be >= 0");
    const double prob = std::exp(-rho * l * (B + 1.0) / (l + 1.0));
    return {B, rho, l, prob};
}

/// E[V] = B (1 - q) with q = e^{-rho(B+1)/2} (gamma=mu) or e^{-rho(B-1)/2} (gamma=inf).
inline double mean_available(int B, double rho, GammaMode mode) {
    if (B < 1) throw ValidationError("mean_available: block count must be at least 1");
    if (!(rho >= 0.0)) throw ValidationError("mean_available: rho must be >= 0");
    const double span = mode == GammaMode::EqualMu ? B + 1.0 : B - 1.0;
    return B * -std::expm1(-rho * span / 2.0);
}

struct BonferroniBounds {
    int blocks;
    double rho;
    double lower;
    double upper;
};

/// First two Bonferroni truncations of the inclusion/exclusion form of p(B; mu).
inline BonferroniBounds bonferroni_bounds(int B, double rho) {
    if (B < 1) throw ValidationError("bonferroni_bounds: block count must be at least 1");
    if (!(rho >= 0.0)) throw ValidationError("bonferroni_bounds: rho must be >= 0");
    const double lower = 1.0 - B * std::exp(-(B + 1.0) * rho / 2.0);
    const double pairs = B * (B - 1.0) / 2.0;
    const double upper = lower + pairs * std::exp(-2.0 * (B + 1.0) * rho / 3.0);
    return {B, rho, lower, upper};
}

/// upper(B) <= lower(B+1): the bracket for B sits entirely below the one for
/// B+1, so self-sustainability grows with file size. Holds for rho >= 1.6, B >= 4.
inline bool file_size_monotone_certificate(int B, double rho) {
    return bonferroni_bounds(B, rho).upper <= bonferroni_bounds(B + 1, rho).lower;
}

enum class MinLoadMode { Approx, Exact };

struct MinLoadResult {
    double rho = 0.0;
    double coverage = 0.0;                 ///< B rho, mean population
    std::optional<double> achieved;        ///< A(rho), exact mode only
};

inline constexpr double kMinLoadTolerance = 1e-6;

/// Load needed for self-sustainability A_star with gamma = inf.
///   Approx: 2 ln(B / (1 - A_star)) / (B - 1)
///   Exact : bisection of A(rho) from avail_distribution
inline MinLoadResult min_load(int B, double A_star, MinLoadMode mode, double eta = 1e-12) {
    if (B < 1) throw ValidationError("min_load: block count must be at least 1");
    if (!(A_star > 0.0 && A_star < 1.0)) throw ValidationError("min_load: target must lie in (0, 1)");
    if (B == 1)
        throw CapabilityError("min_load: a one-block file is never self-sustaining when seeds leave at once");

    MinLoadResult out;
    if (mode == MinLoadMode::Approx) {
        out.rho = 2.0 * std::log(B / (1.0 - A_star)) / (B - 1.0);
        out.coverage = B * out.rho;
        return out;
    }

    auto A = [&](double rho) {
        return avail_distribution(ModelParams::homogeneous_params(B, rho, 1.0), eta).self_sustainability();
    };
    double lo = 1e-6, hi = 64.0;
    double a_hi = A(hi);
    while (a_hi < A_star) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw CapabilityError("min_load: target not reached for any load up to 1e6");
        a_hi = A(hi);
    }
    if (A(lo) >= A_star) hi = lo;
    double a_mid = a_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        a_mid = A(mid);
        (a_mid < A_star ? lo : hi) = mid;
    }
    out.rho = hi;
    out.coverage = B * hi;
    out.achieved = A(hi);
    if (std::abs(*out.achieved - A_star) > kMinLoadTolerance)
        throw CapabilityError("min_load: bisection stalled at |A - A*| = " +
                              std::to_string(std::abs(*out.achieved - A_star)));
    return out;
}

/// A = 1 - (1 - A_inf) exp(-lambda / gamma): a block is missing only if the
/// leechers lack it and no seed is around.
inline double seeded_from_inf(double A_inf, double lambda, double gamma) {
    if (!(A_inf >= 0.0 && A_inf <= 1.0)) throw ValidationError("seeded_from_inf: A_inf must lie in [0, 1]");
    if (!(gamma > 0.0)) throw ValidationError("seeded_from_inf: gamma must be positive");
    if (!(lambda >= 0.0)) throw ValidationError("seeded_from_inf: lambda must be >= 0");
    if (std::isinf(gamma)) return A_inf;
    return 1.0 - (1.0 - A_inf) * std::exp(-lambda / gamma);
}

}  // namespace sustain
