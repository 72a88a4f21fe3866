#pragma once

// Ground truth for the analytical engines: inclusion/exclusion and brute-force
// enumeration for tiny stage vectors, a Monte Carlo sampler of the uniform
// allocation model, and an event-driven simulation of the integrated CTMC.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sustain/availability.hpp"
#include "sustain/error.hpp"
#include "sustain/model_params.hpp"
#include "sustain/rng.hpp"

namespace sustain {

/// Users per stage, n_0..n_B (shorter vectors mean zeros above).
struct StageVector {
    std::vector<int> n;

    int users() const { return std::accumulate(n.begin(), n.end(), 0); }
    int at(int h) const { return h < static_cast<int>(n.size()) ? n[h] : 0; }
};

/// One user's block ownership as a bit set over B blocks.
struct Signature {
    std::vector<std::uint64_t> bits;
    int stage = 0;

    explicit Signature(int B = 0) : bits((B + 63) / 64, 0) {}
    bool has(int b) const { return (bits[b >> 6] >> (b & 63)) & 1u; }
    void set(int b) {
        bits[b >> 6] |= std::uint64_t{1} << (b & 63);
        ++stage;
    }
};

inline constexpr int kInclusionExclusionMaxBlocks = 30;
inline constexpr double kEnumerationLimit = 1e7;

inline void check_stage_vector(int B, const StageVector& s, const char* what) {
    if (B < 1) throw ValidationError(std::string(what) + ": block count must be at least 1");
    if (static_cast<int>(s.n.size()) > B + 1)
        throw ValidationError(std::string(what) + ": stage vector longer than B+1");
    for (int c : s.n)
        if (c < 0) throw ValidationError(std::string(what) + ": stage counts must be nonnegative");
}

/// P(V = B | stage vector) by inclusion/exclusion over the set of missing blocks:
///   |Omega|^-1 sum_i (-1)^i C(B,i) prod_j C(B-i, j)^{n_j}
/// Each product is kept as a ratio to C(B,j)^{n_j} so nothing overflows. The
/// sum runs to i = B; stopping at B-1 would give 1 instead of 0 for a swarm
/// where nobody holds a block.
inline double exact_all_available(int B, const StageVector& s) {
    check_stage_vector(B, s, "exact_all_available");
    if (B > kInclusionExclusionMaxBlocks)
        throw CapabilityError("exact_all_available: B=" + std::to_string(B) +
                              " is beyond the inclusion/exclusion limit of " +
                              std::to_string(kInclusionExclusionMaxBlocks));
    long double sum = 0.0L, comp = 0.0L;
    for (int i = 0; i <= B; ++i) {
        long double log_term = log_choose(B, i);
        bool zero = false;
        for (int j = 0; j <= B && !zero; ++j) {
            const int nj = s.at(j);
            if (nj == 0) continue;
            if (j > B - i) {
                zero = true;
                break;
            }
            log_term += nj * (log_choose(B - i, j) - log_choose(B, j));
        }
        if (zero) continue;
        long double term = std::exp(log_term);
        if (i & 1) term = -term;
        const long double t = sum + term;
        comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    const double p = static_cast<double>(sum + comp);
    return std::clamp(p, 0.0, 1.0);
}

/// P(V = v | stage vector) by visiting every assignment of signatures.
inline std::vector<double> enumerate_cond_dist(int B, const StageVector& s) {
    check_stage_vector(B, s, "enumerate_cond_dist");
    if (B > 63) throw CapabilityError("enumerate_cond_dist: B must be at most 63");
    double space = 1.0;
    for (int h = 0; h <= B; ++h) space *= std::pow(std::exp(log_choose(B, h)), s.at(h));
    if (space > kEnumerationLimit)
        throw CapabilityError("enumerate_cond_dist: " + std::to_string(space) +
                              " signature assignments exceed the enumeration limit");

    // Subsets of each size, as masks.
    std::vector<std::vector<std::uint64_t>> subsets(B + 1);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << B); ++m) subsets[std::popcount(m)].push_back(m);

    std::vector<int> stage_of_user;
    for (int h = 0; h <= B; ++h)
        for (int u = 0; u < s.at(h); ++u) stage_of_user.push_back(h);

    std::vector<std::uint64_t> counts(B + 1, 0);
    auto visit = [&](auto&& self, std::size_t user, std::uint64_t held) -> void {
        if (user == stage_of_user.size()) {
            ++counts[std::popcount(held)];
            return;
        }
        for (std::uint64_t m : subsets[stage_of_user[user]]) self(self, user + 1, held | m);
    };
    visit(visit, 0, 0);

    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    std::vector<double> dist(B + 1);
    for (int v = 0; v <= B; ++v) dist[v] = counts[v] / total;
    return dist;
}

// --- Monte Carlo over the uniform allocation model ---------------------------

inline constexpr double kZ99 = 2.5758293035489004;

struct McAvailEstimate {
    int blocks = 0;
    long samples = 0;
    std::vector<double> p;           ///< empirical P(V = v)
    std::vector<double> half_width;  ///< 99% normal-approximation half widths

    double self_sustainability() const { return p.back(); }
    double lower(int v) const { return std::max(0.0, p[v] - half_width[v]); }
    double upper(int v) const { return std::min(1.0, p[v] + half_width[v]); }
    bool covers(int v, double value) const { return p[v] - half_width[v] <= value && value <= p[v] + half_width[v]; }
};

/// Draws stage occupancies from their Poisson laws and gives each user a
/// uniform h-subset (partial Fisher-Yates), then records V.
inline McAvailEstimate mc_avail_dist(const ModelParams& params, long samples, std::uint64_t seed) {
    validate(params);
    if (!params.gamma.is_infinite() && !params.seeds_at_block_rate())
        throw CapabilityError("mc_avail_dist supports gamma=inf and gamma=mu only");
    if (samples < 1) throw ValidationError("mc_avail_dist: need at least one sample");

    const int B = params.blocks;
    Engine rng = make_engine(seed);
    std::vector<std::poisson_distribution<int>> stage;
    for (int h = 0; h < B; ++h) stage.emplace_back(params.stage_mean(h));
    std::poisson_distribution<int> seeds(std::max(params.seed_mean(), 1e-300));
    const bool with_seeds = params.seed_mean() > 0.0;

    std::vector<int> perm(B);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<char> held(B);
    std::vector<long> counts(B + 1, 0);

    for (long s = 0; s < samples; ++s) {
        std::fill(held.begin(), held.end(), 0);
        int v = 0;
        if (with_seeds && seeds(rng) > 0) v = B;
        for (int h = 1; h < B; ++h) {
            const int users = params.stage_mean(h) > 0.0 ? stage[h](rng) : 0;
            for (int u = 0; u < users; ++u)
                for (int i = 0; i < h; ++i) {
                    std::uniform_int_distribution<int> pick(i, B - 1);
                    std::swap(perm[i], perm[pick(rng)]);
                    if (!held[perm[i]]) {
                        held[perm[i]] = 1;
                        ++v;
                    }
                }
        }
        ++counts[std::min(v, B)];
    }

    McAvailEstimate out;
    out.blocks = B;
    out.samples = samples;
    out.p.resize(B + 1);
    out.half_width.resize(B + 1);
    for (int v = 0; v <= B; ++v) {
        const double p = static_cast<double>(counts[v]) / samples;
        out.p[v] = p;
        out.half_width[v] = kZ99 * std::sqrt(p * (1.0 - p) / samples);
    }
    return out;
}

// --- integrated CTMC ---------------------------------------------------------

struct CtmcOptions {
    double warmup_fraction = 0.2;
    /// Spacing of per-stage occupancy snapshots after warm-up; 0 disables them.
    double snapshot_period = 0.0;
};

struct CtmcMetrics {
    double self_sustainability = 0.0;   ///< time average of {V = B}
    double mean_users = 0.0;
    std::vector<double> stage_means;    ///< time-average occupancy of stages 0..B-1
    std::vector<double> v_dist;         ///< time-average law of V
    std::vector<std::vector<int>> snapshots;  ///< stage occupancies at snapshot instants
    long events = 0;
    double observed_seconds = 0.0;
};

/// Users arrive at rate lambda with nothing and complete a uniformly chosen
/// missing block at rate mu; a user leaves on finishing block B.
inline CtmcMetrics ctmc_simulate(const ModelParams& params, double horizon_seconds, std::uint64_t seed,
                                 const CtmcOptions& opts = {}) {
    validate(params);
    if (!params.homogeneous()) throw CapabilityError("ctmc_simulate needs a single block rate mu");
    if (!params.gamma.is_infinite()) throw CapabilityError("ctmc_simulate supports gamma=inf only");
    if (!(horizon_seconds > 0.0)) throw ValidationError("ctmc_simulate: horizon must be positive");
    if (!(opts.warmup_fraction >= 0.0 && opts.warmup_fraction < 1.0))
        throw ValidationError("ctmc_simulate: warm-up fraction must lie in [0, 1)");
    if (opts.snapshot_period < 0.0) throw ValidationError("ctmc_simulate: snapshot period must be >= 0");

    const int B = params.blocks;
    const double lambda = params.lambda;
    const double mu = params.mu.front();
    Engine rng = make_engine(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Each user keeps a private block order; the first `stage` entries are owned.
    struct User {
        std::vector<int> order;
        int stage = 0;
    };
    std::vector<User> users;
    std::vector<int> replicas(B, 0);
    std::vector<int> stage_count(B, 0);
    int available = 0;

    CtmcMetrics m;
    m.stage_means.assign(B, 0.0);
    m.v_dist.assign(B + 1, 0.0);
    const double warm = opts.warmup_fraction * horizon_seconds;
    double next_snapshot = warm;

    auto accumulate = [&](double from, double to) {
        const double a = std::max(from, warm);
        if (to <= a) return;
        const double dt = to - a;
        m.v_dist[available] += dt;
        m.mean_users += dt * static_cast<double>(users.size());
        for (int h = 0; h < B; ++h) m.stage_means[h] += dt * stage_count[h];
        if (opts.snapshot_period > 0.0)
            while (next_snapshot < to) {
                if (next_snapshot >= a) m.snapshots.push_back(stage_count);
                next_snapshot += opts.snapshot_period;
            }
    };

    double t = 0.0;
    while (true) {
        const double rate = lambda + mu * static_cast<double>(users.size());
        const double dt = rate > 0.0 ? -std::log1p(-unit(rng)) / rate : horizon_seconds;
        if (t + dt >= horizon_seconds) {
            accumulate(t, horizon_seconds);
            break;
        }
        accumulate(t, t + dt);
        t += dt;
        ++m.events;

        if (unit(rng) * rate < lambda) {
            User u;
            u.order.resize(B);
            std::iota(u.order.begin(), u.order.end(), 0);
            users.push_back(std::move(u));
            ++stage_count[0];
            continue;
        }

        std::uniform_int_distribution<std::size_t> who(0, users.size() - 1);
        const std::size_t idx = who(rng);
        User& u = users[idx];
        std::uniform_int_distribution<int> pick(u.stage, B - 1);
        std::swap(u.order[u.stage], u.order[pick(rng)]);
        const int block = u.order[u.stage];
        --stage_count[u.stage];
        ++u.stage;
        if (replicas[block]++ == 0) ++available;

        if (u.stage < B) {
            ++stage_count[u.stage];
            continue;
        }
        for (int b : u.order)
            if (--replicas[b] == 0) --available;
        users[idx] = std::move(users.back());
        users.pop_back();
    }

    m.observed_seconds = horizon_seconds - warm;
    const double span = m.observed_seconds;
    for (double& x : m.v_dist) x /= span;
    for (double& x : m.stage_means) x /= span;
    m.mean_users /= span;
    m.self_sustainability = m.v_dist[B];
    return m;
}

}  // namespace sustain
