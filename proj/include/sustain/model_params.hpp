#pragma once

// Swarm model parameters and the Poisson plumbing shared by every engine.
//
// Users arrive as a Poisson stream of rate lambda and move through B+1
// M/G/inf stages; stage h (0 <= h < B) holds users that own exactly h blocks
// and is left at rate mu_{h+1}. Stage B holds lingering seeds (rate gamma).
// In steady state every stage occupancy is an independent Poisson variable.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sustain/error.hpp"

namespace sustain {

inline constexpr double kDefaultEta = 1e-9;
inline constexpr double kDefaultBlockBytes = 262144.0;

/// How long completed peers stay around as seeds.
class Gamma {
public:
    enum class Kind { Infinite, EqualMu, Rate };

    static Gamma infinite() { return Gamma(Kind::Infinite, 0.0); }
    static Gamma equal_mu() { return Gamma(Kind::EqualMu, 0.0); }
    static Gamma rate(double r) { return Gamma(Kind::Rate, r); }

    Kind kind() const noexcept { return kind_; }
    bool is_infinite() const noexcept { return kind_ == Kind::Infinite; }
    /// Departure rate; only meaningful for Kind::Rate.
    double value() const noexcept { return rate_; }

private:
    Gamma(Kind k, double r) : kind_(k), rate_(r) {}
    Kind kind_;
    double rate_;
};

/// The two seed regimes that have full availability distributions.
enum class GammaMode { Infinite, EqualMu };

inline const char* to_string(GammaMode m) {
    return m == GammaMode::Infinite ? "inf" : "mu";
}

struct ModelParams {
    double lambda = 0.0;            ///< arrivals per second
    std::vector<double> mu{1.0};    ///< one rate, or one rate per block (blocks/second)
    Gamma gamma = Gamma::infinite();
    int blocks = 1;
    double block_bytes = kDefaultBlockBytes;

    bool homogeneous() const noexcept { return mu.size() == 1; }

    /// Rate at which a stage-(j-1) user fetches its j-th block, 1 <= j <= B.
    double mu_of(int j) const { return homogeneous() ? mu.front() : mu.at(j - 1); }

    /// Mean occupancy of stage h, 0 <= h < B.
    double stage_mean(int h) const { return lambda / mu_of(h + 1); }

    /// Seed-stage mean, zero when seeds leave immediately.
    double seed_mean() const {
        switch (gamma.kind()) {
            case Gamma::Kind::Infinite: return 0.0;
            case Gamma::Kind::EqualMu: return lambda / mu.front();
            case Gamma::Kind::Rate: return lambda / gamma.value();
        }
        return 0.0;
    }

    /// gamma == mu is the regime with the seeded recursion and closed forms;
    /// an explicit rate that happens to equal a scalar mu is folded into it.
    bool seeds_at_block_rate() const {
        if (gamma.kind() == Gamma::Kind::EqualMu) return true;
        return gamma.kind() == Gamma::Kind::Rate && homogeneous() && gamma.value() == mu.front();
    }

    static ModelParams homogeneous_params(int blocks, double lambda, double mu,
                                          Gamma gamma = Gamma::infinite()) {
        ModelParams p;
        p.blocks = blocks;
        p.lambda = lambda;
        p.mu = {mu};
        p.gamma = gamma;
        return p;
    }
};

struct LoadProfile {
    double rho = 0.0;              ///< per-stage load lambda/mu (mean over stages if heterogeneous)
    std::vector<double> sigma;     ///< probability a random leecher sits in stage h
    double total_mean = 0.0;       ///< mean population, seeds included
};

inline LoadProfile validate(const ModelParams& p) {
    if (p.blocks < 1) throw ValidationError("block count must be at least 1");
    if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
        throw ValidationError("arrival rate lambda must be a finite value >= 0");
    if (p.mu.empty()) throw ValidationError("mu must hold one rate or one rate per block");
    if (!p.homogeneous() && static_cast<int>(p.mu.size()) != p.blocks)
        throw ValidationError("per-block mu vector has " + std::to_string(p.mu.size()) +
                              " entries, expected " + std::to_string(p.blocks));
    for (double m : p.mu)
        if (!(m > 0.0) || !std::isfinite(m))
            throw ValidationError("every block download rate mu must be positive and finite");
    if (p.gamma.kind() == Gamma::Kind::Rate && !(p.gamma.value() > 0.0))
        throw ValidationError("seed departure rate gamma must be positive (or inf)");
    if (p.gamma.kind() == Gamma::Kind::EqualMu && !p.homogeneous())
        throw ValidationError("gamma=mu needs a single block download rate");
    if (!(p.block_bytes > 0.0)) throw ValidationError("block size must be positive");

    LoadProfile out;
    const int B = p.blocks;
    out.sigma.resize(B);
    double inv_sum = 0.0;
    for (int j = 1; j <= B; ++j) inv_sum += 1.0 / p.mu_of(j);
    for (int h = 0; h < B; ++h) out.sigma[h] = (1.0 / p.mu_of(h + 1)) / inv_sum;
    if (p.homogeneous())
        std::fill(out.sigma.begin(), out.sigma.end(), 1.0 / B);

    const double leechers = p.lambda * inv_sum;
    out.rho = leechers / B;
    if (p.homogeneous()) out.rho = p.lambda / p.mu.front();
    out.total_mean = (p.homogeneous() ? B * out.rho : leechers) + p.seed_mean();
    return out;
}

/// e^{-mean} mean^n / n!, evaluated in log space.
inline double poisson_pmf(double mean, long n) {
    if (n < 0) return 0.0;
    if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
    const double log_p = -mean + static_cast<double>(n) * std::log(mean) -
                         boost::math::lgamma(static_cast<double>(n) + 1.0);
    return std::exp(log_p);
}

/// P(X > n) for X ~ Poisson(mean).
inline double poisson_upper_tail(double mean, long n) {
    if (n < 0) return 1.0;
    if (mean <= 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(n) + 1.0, mean);
}

/// Smallest N whose Poisson(mean) upper tail beyond N is at most eta.
///
/// Large means start from the normal-approximation guess and then walk to the
/// exact answer, so the returned N always satisfies the exact tail bound.
inline long choose_truncation(double mean, double eta = kDefaultEta) {
    if (!(eta > 0.0)) throw ValidationError("truncation tolerance eta must be positive");
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw ValidationError("Poisson mean must be finite and nonnegative");
    if (eta >= 1.0 || mean == 0.0) return 0;

    auto ok = [&](long n) { return poisson_upper_tail(mean, n) <= eta; };

    long lo = -1;  // invariant: !ok(lo) (or lo == -1), ok(hi)
    long hi;
    if (mean > 1000.0) {
        const double z = boost::math::quantile(boost::math::complement(boost::math::normal(), eta));
        long guess = static_cast<long>(std::ceil(mean + z * std::sqrt(mean)));
        long step = 1 + static_cast<long>(std::sqrt(mean) / 8.0);
        if (ok(guess)) {
            hi = guess;
            lo = std::max(-1L, guess - step);
            while (lo >= 0 && ok(lo)) {
                hi = lo;
                step *= 2;
                lo = std::max(-1L, lo - step);
            }
        } else {
            lo = guess;
            hi = guess + step;
            while (!ok(hi)) {
                lo = hi;
                step *= 2;
                hi += step;
            }
        }
    } else {
        hi = static_cast<long>(mean) + 1;
        while (!ok(hi)) {
            lo = hi;
            hi *= 2;
        }
    }
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

/// log C(n, k) through log-gamma; -inf outside 0 <= k <= n.
inline double log_choose(long n, long k) {
    if (k < 0 || k > n || n < 0) return -std::numeric_limits<double>::infinity();
    return boost::math::lgamma(static_cast<double>(n) + 1.0) -
           boost::math::lgamma(static_cast<double>(k) + 1.0) -
           boost::math::lgamma(static_cast<double>(n - k) + 1.0);
}

/// Log-factorial table for repeated binomials over a fixed range.
class LogFactorials {
public:
    explicit LogFactorials(int n_max) : table_(static_cast<std::size_t>(n_max) + 1, 0.0) {
        for (int i = 2; i <= n_max; ++i) table_[i] = boost::math::lgamma(static_cast<double>(i) + 1.0);
    }
    double operator()(int n) const { return table_.at(n); }
    double choose(int n, int k) const {
        if (k < 0 || k > n || n < 0) return -std::numeric_limits<double>::infinity();
        return table_[n] - table_[k] - table_[n - k];
    }

private:
    std::vector<double> table_;
};

}  // namespace sustain
