#pragma once

// Event traces of the swarm simulator and the statistics computed from them:
// replica counts, per-index block download times, and the periodic ownership
// samples used to check that block allocation looks uniform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "sustain/error.hpp"
#include "sustain/rng.hpp"

namespace sustain {

enum class TraceKind { Join, BlockComplete, Depart, Sample };

inline const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Join: return "JOIN";
        case TraceKind::BlockComplete: return "BLOCK_COMPLETE";
        case TraceKind::Depart: return "DEPART";
        case TraceKind::Sample: return "SAMPLE";
    }
    return "?";
}

/// Block set over B blocks, 64 per word.
class BlockSet {
public:
    BlockSet() = default;
    explicit BlockSet(int B) : words_((B + 63) / 64, 0) {}

    bool has(int b) const { return (words_[b >> 6] >> (b & 63)) & 1u; }
    void set(int b) { words_[b >> 6] |= std::uint64_t{1} << (b & 63); }
    void clear(int b) { words_[b >> 6] &= ~(std::uint64_t{1} << (b & 63)); }

    /// True when this set holds a block that `other` lacks.
    bool has_block_missing_from(const BlockSet& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return true;
        return false;
    }

    /// Hex, most significant block first, ceil(B/4) digits.
    std::string hex(int B) const {
        std::string out;
        const int digits = (B + 3) / 4;
        out.reserve(digits);
        static const char* kDigits = "0123456789abcdef";
        for (int d = digits - 1; d >= 0; --d) {
            int nibble = 0;
            for (int k = 3; k >= 0; --k) {
                const int b = 4 * d + k;
                nibble = (nibble << 1) | (b < B && has(b) ? 1 : 0);
            }
            out.push_back(kDigits[nibble]);
        }
        return out;
    }

private:
    std::vector<std::uint64_t> words_;
};

struct TraceEvent {
    double time = 0.0;
    TraceKind kind = TraceKind::Sample;
    int peer = -1;          ///< -1 for SAMPLE
    int block = -1;         ///< set for BLOCK_COMPLETE only
    BlockSet signature;     ///< the peer's blocks after the event; union of peers for SAMPLE
};

/// One SAMPLE record marks the end of warm-up and one the horizon.
struct SwarmTrace {
    int blocks = 0;
    double warmup_end = 0.0;
    double horizon = 0.0;
    std::vector<TraceEvent> events;

    bool empty() const { return events.empty(); }
};

inline std::string format_trace_line(const SwarmTrace& trace, const TraceEvent& e) {
    char head[96];
    std::snprintf(head, sizeof head, "%.6f %s %d %d ", e.time, to_string(e.kind), e.peer, e.block);
    return head + e.signature.hex(trace.blocks);
}

/// One line per event: timestamp_s event peer_id block_id signature_hex
inline void write_trace(const SwarmTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open trace file for writing");
    for (const auto& e : trace.events) out << format_trace_line(trace, e) << '\n';
    out.flush();
    if (!out) throw IoError(path, "write to trace file failed");
}

// --- replay ------------------------------------------------------------------

/// Replays JOIN/BLOCK_COMPLETE/DEPART to recover who holds what at any time.
class TraceReplay {
public:
    explicit TraceReplay(const SwarmTrace& trace) : trace_(trace), replicas_(trace.blocks, 0) {}

    /// Apply every event with time <= t.
    void advance_to(double t) {
        const auto& ev = trace_.events;
        while (next_ < ev.size() && ev[next_].time <= t) apply(ev[next_++]);
    }
    bool done() const { return next_ >= trace_.events.size(); }
    double next_time() const { return trace_.events[next_].time; }
    void step() { apply(trace_.events[next_++]); }

    const std::vector<int>& replicas() const { return replicas_; }
    const std::unordered_map<int, std::vector<int>>& holdings() const { return held_; }
    /// Peer ids in join order, for deterministic iteration.
    const std::vector<int>& live_peers() const { return order_; }
    const std::vector<int>& blocks_of(int peer) const { return held_.at(peer); }

private:
    void apply(const TraceEvent& e) {
        switch (e.kind) {
            case TraceKind::Join:
                held_[e.peer];
                order_.push_back(e.peer);
                break;
            case TraceKind::BlockComplete:
                held_[e.peer].push_back(e.block);
                ++replicas_[e.block];
                break;
            case TraceKind::Depart: {
                for (int b : held_[e.peer]) --replicas_[b];
                held_.erase(e.peer);
                order_.erase(std::find(order_.begin(), order_.end(), e.peer));
                break;
            }
            case TraceKind::Sample: break;
        }
    }

    const SwarmTrace& trace_;
    std::size_t next_ = 0;
    std::vector<int> replicas_;
    std::unordered_map<int, std::vector<int>> held_;
    std::vector<int> order_;
};

// --- replica statistics --------------------------------------------------------

struct ReplicaStats {
    std::vector<double> replica_mean;                ///< per block, publisher copy included
    std::vector<double> replica_mean_peers_only;     ///< per block, peers only
    std::vector<double> cv_series;                   ///< c_t at each sample instant
    std::vector<double> cv_times;

    bool empty() const { return replica_mean.empty(); }
};

/// Time-averaged replicas per block over [warm-up end, horizon] and
///   c_t = sqrt(sum_i (r_{i,t} - mu_t)^2 / B) / mu_t
/// every sample_period seconds, both counting the publisher's copy.
inline ReplicaStats replica_stats(const SwarmTrace& trace, double sample_period = 10.0) {
    ReplicaStats out;
    if (trace.empty() || trace.blocks < 1) return out;
    const int B = trace.blocks;
    const double t0 = trace.warmup_end, t1 = trace.horizon;
    out.replica_mean.assign(B, 0.0);

    TraceReplay replay(trace);
    replay.advance_to(t0);
    double now = t0;
    double next_sample = t0;
    auto sample_cv = [&](double t) {
        double mean = 0.0;
        for (int r : replay.replicas()) mean += r + 1.0;
        mean /= B;
        double ss = 0.0;
        for (int r : replay.replicas()) ss += (r + 1.0 - mean) * (r + 1.0 - mean);
        out.cv_series.push_back(std::sqrt(ss / B) / mean);
        out.cv_times.push_back(t);
    };
    auto hold = [&](double until) {
        while (sample_period > 0.0 && next_sample <= until && next_sample < t1) {
            sample_cv(next_sample);
            next_sample += sample_period;
        }
        const double dt = until - now;
        if (dt > 0.0)
            for (int b = 0; b < B; ++b) out.replica_mean[b] += dt * replay.replicas()[b];
        now = until;
    };
    while (!replay.done() && replay.next_time() <= t1) {
        const double t = replay.next_time();
        if (t > now) hold(t);
        // Sample before applying events stamped exactly at the sample instant.
        replay.step();
    }
    hold(t1);

    const double span = t1 - t0;
    out.replica_mean_peers_only = out.replica_mean;
    for (int b = 0; b < B; ++b) {
        out.replica_mean_peers_only[b] = span > 0.0 ? out.replica_mean[b] / span : 0.0;
        out.replica_mean[b] = out.replica_mean_peers_only[b] + 1.0;
    }
    return out;
}

// --- per-index download times --------------------------------------------------

struct SummaryStats {
    long count = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
inline SummaryStats summarize(std::vector<double> xs) {
    SummaryStats s;
    if (xs.empty()) return s;
    std::sort(xs.begin(), xs.end());
    auto q = [&](double p) {
        const double pos = p * (xs.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, xs.size() - 1);
        return xs[lo] + (pos - lo) * (xs[hi] - xs[lo]);
    };
    s.count = static_cast<long>(xs.size());
    s.min = xs.front();
    s.max = xs.back();
    s.q1 = q(0.25);
    s.median = q(0.5);
    s.q3 = q(0.75);
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    return s;
}

/// Entry h-1 describes the wait for a peer's h-th block (the first measured
/// from its join). Only intervals ending after warm-up are counted.
inline std::vector<SummaryStats> block_time_stats(const SwarmTrace& trace) {
    if (trace.empty() || trace.blocks < 1) return {};
    const int B = trace.blocks;
    std::vector<std::vector<double>> waits(B);
    std::unordered_map<int, std::pair<double, int>> last;  // peer -> (time of last gain, blocks held)
    for (const auto& e : trace.events) {
        if (e.kind == TraceKind::Join) {
            last[e.peer] = {e.time, 0};
        } else if (e.kind == TraceKind::BlockComplete) {
            auto& [t, h] = last[e.peer];
            if (e.time >= trace.warmup_end && e.time <= trace.horizon) waits[h].push_back(e.time - t);
            t = e.time;
            ++h;
        } else if (e.kind == TraceKind::Depart) {
            last.erase(e.peer);
        }
    }
    std::vector<SummaryStats> out;
    out.reserve(B);
    for (auto& w : waits) out.push_back(summarize(std::move(w)));
    return out;
}

// --- ownership uniformity ------------------------------------------------------

struct UniformityHist {
    std::vector<long> counts;
    long samples = 0;
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson chi-square against the uniform law; p = 1 for an empty histogram.
inline void chi_square_uniform(UniformityHist& h) {
    h.samples = std::accumulate(h.counts.begin(), h.counts.end(), 0L);
    h.dof = static_cast<int>(h.counts.size()) - 1;
    h.chi2 = 0.0;
    h.p_value = 1.0;
    if (h.samples == 0 || h.dof < 1) return;
    const double expected = static_cast<double>(h.samples) / h.counts.size();
    for (long c : h.counts) h.chi2 += (c - expected) * (c - expected) / expected;
    h.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(h.dof), h.chi2));
}

struct OwnershipHists {
    UniformityHist first_block;   ///< block held by a random one-block peer
    UniformityHist last_block;    ///< block missing from a random (B-1)-block peer
    UniformityHist first_pair;    ///< pair held by a random two-block peer, C(B,2) bins

    bool empty() const { return first_block.samples + last_block.samples + first_pair.samples == 0; }
};

/// Index of the pair i < j among the C(B,2) pairs in lexicographic order.
inline int pair_index(int B, int i, int j) {
    if (i > j) std::swap(i, j);
    return i * (2 * B - i - 1) / 2 + (j - i - 1);
}

inline void rescore(OwnershipHists& h) {
    chi_square_uniform(h.first_block);
    chi_square_uniform(h.last_block);
    chi_square_uniform(h.first_pair);
}

/// Every sample_period seconds after warm-up, pick uniformly one peer holding
/// exactly one block, one holding B-1, and one holding two, and record which.
inline OwnershipHists ownership_uniformity(const SwarmTrace& trace, double sample_period = 500.0,
                                           std::uint64_t seed = 0) {
    OwnershipHists out;
    const int B = trace.blocks;
    out.first_block.counts.assign(std::max(B, 0), 0);
    out.last_block.counts.assign(std::max(B, 0), 0);
    out.first_pair.counts.assign(std::max(B * (B - 1) / 2, 0), 0);
    if (!trace.empty() && B >= 2 && sample_period > 0.0) {
        Engine rng = make_engine(seed, 0x6f776e);
        TraceReplay replay(trace);
        auto pick = [&](int stage) -> int {
            std::vector<int> who;
            for (int p : replay.live_peers())
                if (static_cast<int>(replay.blocks_of(p).size()) == stage) who.push_back(p);
            if (who.empty()) return -1;
            std::uniform_int_distribution<std::size_t> u(0, who.size() - 1);
            return who[u(rng)];
        };
        for (double t = trace.warmup_end; t < trace.horizon; t += sample_period) {
            replay.advance_to(t);
            if (int p = pick(1); p >= 0) ++out.first_block.counts[replay.blocks_of(p)[0]];
            if (int p = pick(B - 1); p >= 0) {
                std::vector<char> has(B, 0);
                for (int b : replay.blocks_of(p)) has[b] = 1;
                ++out.last_block.counts[std::find(has.begin(), has.end(), 0) - has.begin()];
            }
            if (int p = pick(2); p >= 0) {
                const auto& held = replay.blocks_of(p);
                ++out.first_pair.counts[pair_index(B, held[0], held[1])];
            }
        }
    }
    rescore(out);
    return out;
}

/// Adds b's counts into a and recomputes the statistics.
inline void pool(OwnershipHists& a, const OwnershipHists& b) {
    auto add = [](UniformityHist& x, const UniformityHist& y) {
        if (x.counts.size() < y.counts.size()) x.counts.resize(y.counts.size(), 0);
        for (std::size_t i = 0; i < y.counts.size(); ++i) x.counts[i] += y.counts[i];
    };
    add(a.first_block, b.first_block);
    add(a.last_block, b.last_block);
    add(a.first_pair, b.first_pair);
    rescore(a);
}

}  // namespace sustain
