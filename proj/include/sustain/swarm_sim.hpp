#pragma once

// Discrete-event simulation of a BitTorrent-like swarm: a tracker, an always-on
// publisher, and leechers that trade 16 KB sub-blocks under rarest-first piece
// selection and a tit-for-tat choking policy. Transfers are fluid and share
// upload and download capacity max-min fairly; the allocation is recomputed
// whenever a transfer starts or ends. With unbounded download this is an even
// split of each uploader's capacity over its running transfers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "sustain/error.hpp"
#include "sustain/rng.hpp"
#include "sustain/swarm_trace.hpp"

namespace sustain {

struct SimConfig {
    int B = 16;
    double block_bytes = 262144.0;
    int subblocks_per_block = 16;
    int peer_set_target = 50;
    int peer_set_min = 20;
    int active_set_size = 5;
    int reciprocated_slots_max = 4;
    double round_seconds = 10.0;
    int first_random_blocks = 4;
    double peer_upload_Bps = 39.0 * 1024.0;
    std::optional<double> publisher_upload_Bps;   ///< defaults to peer_upload_Bps
    std::optional<double> peer_download_Bps;      ///< defaults to peer_upload_Bps; inf = unbounded
    double lambda = 0.0;                          ///< peers per second
    double seed_linger_rate = std::numeric_limits<double>::infinity();
    double horizon_seconds = 10000.0;
    double warmup_fraction = 0.2;
    std::uint64_t rng_seed = 1;

    double publisher_rate() const { return publisher_upload_Bps.value_or(peer_upload_Bps); }
    double download_rate() const { return peer_download_Bps.value_or(peer_upload_Bps); }
    /// Blocks per second one peer can push: the model's mu.
    double nominal_mu() const { return peer_upload_Bps / block_bytes; }
    double nominal_rho() const { return lambda / nominal_mu(); }
};

inline void validate(const SimConfig& c) {
    auto fail = [](const std::string& what) { throw ValidationError("simulation config: " + what); };
    if (c.B < 1) fail("B must be at least 1");
    if (!(c.block_bytes > 0.0) || !std::isfinite(c.block_bytes)) fail("block_bytes must be positive");
    if (c.subblocks_per_block < 1) fail("subblocks_per_block must be at least 1");
    if (c.peer_set_target < 1) fail("peer_set_target must be at least 1");
    if (c.peer_set_min < 0 || c.peer_set_min > c.peer_set_target)
        fail("peer_set_min must lie in [0, peer_set_target]");
    if (c.active_set_size < 1) fail("active_set_size must be at least 1");
    if (c.reciprocated_slots_max < 0 || c.reciprocated_slots_max > c.active_set_size)
        fail("reciprocated_slots_max must lie in [0, active_set_size]");
    if (!(c.round_seconds > 0.0) || !std::isfinite(c.round_seconds)) fail("round_seconds must be positive");
    if (c.first_random_blocks < 0) fail("first_random_blocks must be >= 0");
    if (!(c.peer_upload_Bps > 0.0) || !std::isfinite(c.peer_upload_Bps)) fail("peer_upload_Bps must be positive");
    if (!(c.publisher_rate() > 0.0) || !std::isfinite(c.publisher_rate()))
        fail("publisher_upload_Bps must be positive");
    if (!(c.download_rate() > 0.0)) fail("peer_download_Bps must be positive (or inf)");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) fail("lambda must be finite and >= 0");
    if (!(c.seed_linger_rate > 0.0)) fail("seed_linger_rate must be positive (or inf)");
    if (!(c.horizon_seconds > 0.0) || !std::isfinite(c.horizon_seconds)) fail("horizon_seconds must be positive");
    if (!(c.warmup_fraction >= 0.0 && c.warmup_fraction < 1.0)) fail("warmup_fraction must lie in [0, 1)");
}

struct SimMetrics {
    double self_sustainability = 0.0;   ///< time fraction with every block held by some peer
    double mean_peers = 0.0;
    double mean_leechers = 0.0;
    double effective_mu = 0.0;          ///< blocks completed per leecher-second
    long peers_joined = 0;
    long peers_completed = 0;
    long stalled_peers = 0;             ///< joined well before the horizon but never finished
    double peak_upload_ratio = 0.0;     ///< max over nodes of (sum of transfer rates) / capacity
    std::vector<double> replica_mean;             ///< publisher copy included
    std::vector<double> replica_mean_peers_only;
    std::vector<double> cv_series;
    std::vector<SummaryStats> block_download_time;  ///< entry h-1: wait for the h-th block
    OwnershipHists ownership;
};

struct SimResult {
    SimMetrics metrics;
    SwarmTrace trace;
};

namespace detail {

class SwarmSimulator {
public:
    SwarmSimulator(const SimConfig& cfg, std::uint64_t stream)
        : cfg_(cfg), B_(cfg.B), S_(cfg.subblocks_per_block),
          sub_bytes_(cfg.block_bytes / cfg.subblocks_per_block),
          warm_(cfg.warmup_fraction * cfg.horizon_seconds), horizon_(cfg.horizon_seconds),
          rng_(make_engine(cfg.rng_seed, stream)), replicas_(cfg.B, 0) {
        trace_.blocks = B_;
        trace_.warmup_end = warm_;
        trace_.horizon = horizon_;
    }

    SimResult run() {
        Node& pub = new_node(true);
        pub.capacity = cfg_.publisher_rate();
        for (int b = 0; b < B_; ++b) pub.have.set(b);
        pub.have_count = B_;
        pub.seed = true;

        if (cfg_.lambda > 0.0) push(draw_exp(cfg_.lambda), EventType::Arrival, -1);
        push(warm_, EventType::Sample, -1);
        push(0.0, EventType::Round, pub.id);

        while (!queue_.empty() && queue_.top().time <= horizon_) {
            const Event e = queue_.top();
            queue_.pop();
            now_ = e.time;
            settle();
            switch (e.type) {
                case EventType::Arrival: on_arrival(); break;
                case EventType::Round: on_round(e.node); break;
                case EventType::Transfer: on_transfer_done(e.version); break;
                case EventType::Depart:
                    if (nodes_[e.node].alive) depart(e.node);
                    break;
                case EventType::Sample: integrate(now_); sample(); break;
            }
            if (dirty_) reallocate();
        }
        now_ = horizon_;
        integrate(horizon_);
        sample();
        return finish();
    }

private:
    enum class EventType { Arrival, Round, Transfer, Depart, Sample };

    struct Event {
        double time;
        std::uint64_t seq;
        EventType type;
        int node;
        std::uint64_t version;
        bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };

    struct Node {
        int id = 0;
        bool alive = true;
        bool publisher = false;
        bool seed = false;
        double join_time = 0.0;
        double capacity = 0.0;
        BlockSet have;
        int have_count = 0;
        std::vector<int> neighbors;
        std::vector<int> nb_count;        // neighbors advertising each block
        std::vector<int> done, inflight;  // sub-blocks per block
        std::vector<int> unchoked;
        double download_capacity = 0.0;
        std::vector<int> uploads, downloads;  // transfer indices
        double up_left = 0.0, down_left = 0.0;  // scratch for reallocate()
        int up_open = 0, down_open = 0;
        std::vector<std::pair<int, double>> received;  // bytes from each neighbor this round
    };

    struct Transfer {
        int from = -1, to = -1, block = -1;
        double remaining = 0.0, rate = 0.0;
        bool live = false, fixed = false;
    };

    // --- bookkeeping -----------------------------------------------------------

    Node& new_node(bool publisher) {
        Node n;
        n.id = static_cast<int>(nodes_.size());
        n.publisher = publisher;
        n.join_time = now_;
        n.capacity = cfg_.peer_upload_Bps;
        n.download_capacity = cfg_.download_rate();
        n.have = BlockSet(B_);
        n.nb_count.assign(B_, 0);
        if (!publisher) {
            n.done.assign(B_, 0);
            n.inflight.assign(B_, 0);
        }
        nodes_.push_back(std::move(n));
        live_pos_.push_back(static_cast<int>(live_.size()));
        live_.push_back(nodes_.back().id);
        return nodes_.back();
    }

    void push(double t, EventType type, int node, std::uint64_t version = 0) {
        queue_.push({t, seq_++, type, node, version});
    }

    double draw_exp(double rate) { return now_ + std::exponential_distribution<double>(rate)(rng_); }

    template <typename T>
    T& pick(std::vector<T>& v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
    }

    void integrate(double t) {
        const double a = std::max(clock_, warm_);
        const double b = std::min(t, horizon_);
        if (b > a) {
            const double dt = b - a;
            if (available_ == B_) sustained_time_ += dt;
            peer_time_ += dt * (static_cast<double>(live_.size()) - 1.0);
            leecher_time_ += dt * leechers_;
        }
        clock_ = std::max(clock_, t);
    }

    void record(TraceKind kind, const Node& n, int block) {
        trace_.events.push_back({now_, kind, n.id, block, n.have});
    }

    void sample() {
        BlockSet all(B_);
        for (int b = 0; b < B_; ++b)
            if (replicas_[b] > 0) all.set(b);
        trace_.events.push_back({now_, TraceKind::Sample, -1, -1, all});
    }

    // --- transfers -------------------------------------------------------------

    void settle() {
        if (now_ > settled_at_)
            for (int t : active_) transfers_[t].remaining -= transfers_[t].rate * (now_ - settled_at_);
        settled_at_ = now_;
    }

    /// Max-min fair rates by progressive filling: repeatedly find the node
    /// side (upload or download) with the smallest fair share left, freeze its
    /// open transfers at that share and charge them to their other end.
    /// Then schedule the earliest completion.
    void reallocate() {
        dirty_ = false;
        ++alloc_version_;
        if (active_.empty()) return;
        for (int id : live_) {
            Node& n = nodes_[id];
            n.up_left = n.capacity;
            n.down_left = n.download_capacity;
            n.up_open = static_cast<int>(n.uploads.size());
            n.down_open = static_cast<int>(n.downloads.size());
        }
        for (int t : active_) transfers_[t].fixed = false;
        for (std::size_t left = active_.size(); left > 0;) {
            double share = std::numeric_limits<double>::infinity();
            int node = -1;
            bool upload_side = true;
            for (int id : live_) {
                const Node& n = nodes_[id];
                if (n.up_open > 0 && n.up_left / n.up_open < share) {
                    share = n.up_left / n.up_open;
                    node = id;
                    upload_side = true;
                }
                if (n.down_open > 0 && n.down_left / n.down_open < share) {
                    share = n.down_left / n.down_open;
                    node = id;
                    upload_side = false;
                }
            }
            const Node& b = nodes_[node];
            for (int t : upload_side ? b.uploads : b.downloads) {
                Transfer& tr = transfers_[t];
                if (tr.fixed) continue;
                tr.fixed = true;
                tr.rate = share;
                Node& u = nodes_[tr.from];
                Node& d = nodes_[tr.to];
                u.up_left = std::max(0.0, u.up_left - share);
                --u.up_open;
                d.down_left = std::max(0.0, d.down_left - share);
                --d.down_open;
                --left;
            }
        }
        double first = std::numeric_limits<double>::infinity();
        for (int t : active_) first = std::min(first, std::max(0.0, transfers_[t].remaining) / transfers_[t].rate);
        for (int id : live_) {
            const Node& n = nodes_[id];
            if (n.uploads.empty()) continue;
            double total = 0.0;
            for (int t : n.uploads) total += transfers_[t].rate;
            peak_ratio_ = std::max(peak_ratio_, total / n.capacity);
        }
        push(now_ + first, EventType::Transfer, -1, alloc_version_);
    }

    int transfer_between(const Node& u, int d) const {
        for (int t : u.uploads)
            if (transfers_[t].to == d) return t;
        return -1;
    }

    bool unchokes(const Node& u, int d) const {
        return std::find(u.unchoked.begin(), u.unchoked.end(), d) != u.unchoked.end();
    }

    void start_transfer(Node& u, Node& d, int b) {
        int idx;
        if (free_.empty()) {
            idx = static_cast<int>(transfers_.size());
            transfers_.emplace_back();
        } else {
            idx = free_.back();
            free_.pop_back();
        }
        Transfer& t = transfers_[idx];
        t.from = u.id;
        t.to = d.id;
        t.block = b;
        t.remaining = sub_bytes_;
        t.rate = 0.0;
        t.live = true;
        u.uploads.push_back(idx);
        d.downloads.push_back(idx);
        active_.push_back(idx);
        ++d.inflight[b];
        dirty_ = true;
    }

    void detach(int idx) {
        Transfer& t = transfers_[idx];
        t.live = false;
        std::erase(nodes_[t.from].uploads, idx);
        std::erase(nodes_[t.to].downloads, idx);
        std::erase(active_, idx);
        --nodes_[t.to].inflight[t.block];
        free_.push_back(idx);
        dirty_ = true;
    }

    /// Drops a running transfer; its partial progress is lost.
    void abort_transfer(int idx) { detach(idx); }

    /// Next block d should ask u for. While d holds fewer than
    /// first_random_blocks blocks: uniform over what u offers. Afterwards d
    /// looks at every block some unchoking neighbor offers and wants only the
    /// rarest of those (by its neighbors' bitfields); if u has none of them
    /// the connection idles. A peer-to-peer connection ignores what only the
    /// publisher offers, otherwise every peer would queue on the publisher for
    /// blocks no one else has. Among the candidates a started block wins.
    int choose_block(const Node& d, const Node& u) {
        auto open = [&](int b) { return !d.have.has(b) && d.done[b] + d.inflight[b] < S_; };
        candidates_.clear();
        if (d.have_count < cfg_.first_random_blocks) {
            for (int b = 0; b < B_; ++b)
                if (open(b) && u.have.has(b)) candidates_.push_back(b);
        } else {
            int rarest = std::numeric_limits<int>::max();
            for (int b = 0; b < B_; ++b) {
                if (!open(b) || d.nb_count[b] >= rarest) continue;
                for (int w : d.neighbors)
                    if ((u.publisher || !nodes_[w].publisher) && nodes_[w].have.has(b) && unchokes(nodes_[w], d.id)) {
                        rarest = d.nb_count[b];
                        break;
                    }
            }
            for (int b = 0; b < B_; ++b)
                if (open(b) && u.have.has(b) && d.nb_count[b] == rarest) candidates_.push_back(b);
        }
        if (candidates_.empty()) return -1;
        int best_started = 0;
        for (int b : candidates_) best_started = std::max(best_started, d.done[b] + d.inflight[b]);
        if (best_started > 0)
            std::erase_if(candidates_, [&](int b) { return d.done[b] + d.inflight[b] != best_started; });
        return pick(candidates_);
    }

    /// Put every idle connection into d from an unchoking neighbor to work.
    void fill(int d_id) {
        Node& d = nodes_[d_id];
        if (!d.alive || d.seed) return;
        for (int u_id : d.neighbors) {
            Node& u = nodes_[u_id];
            if (!unchokes(u, d_id) || transfer_between(u, d_id) >= 0) continue;
            const int b = choose_block(d, u);
            if (b >= 0) start_transfer(u, d, b);
        }
    }

    // --- membership ------------------------------------------------------------

    void link(Node& a, Node& b) {
        a.neighbors.push_back(b.id);
        b.neighbors.push_back(a.id);
        for (int k = 0; k < B_; ++k) {
            if (b.have.has(k)) ++a.nb_count[k];
            if (a.have.has(k)) ++b.nb_count[k];
        }
    }

    /// Connect n to random live nodes it does not know yet, up to the target.
    void contact_tracker(int n_id) {
        std::vector<int> fresh;
        {
            const Node& n = nodes_[n_id];
            for (int c : live_)
                if (c != n_id && std::find(n.neighbors.begin(), n.neighbors.end(), c) == n.neighbors.end())
                    fresh.push_back(c);
        }
        const int want = cfg_.peer_set_target - static_cast<int>(nodes_[n_id].neighbors.size());
        const int take = std::min<int>(want, static_cast<int>(fresh.size()));
        for (int i = 0; i < take; ++i) {
            std::uniform_int_distribution<int> pos(i, static_cast<int>(fresh.size()) - 1);
            std::swap(fresh[i], fresh[pos(rng_)]);
            link(nodes_[n_id], nodes_[fresh[i]]);
        }
    }

    void on_arrival() {
        integrate(now_);
        const int id = new_node(false).id;
        ++joined_;
        ++leechers_;
        record(TraceKind::Join, nodes_[id], -1);
        contact_tracker(id);
        rechoke(id);
        fill(id);
        push(draw_exp(cfg_.lambda), EventType::Arrival, -1);
    }

    void depart(int id) {
        integrate(now_);
        Node& d = nodes_[id];
        record(TraceKind::Depart, d, -1);
        d.alive = false;
        if (!d.seed) --leechers_;
        for (int b = 0; b < B_; ++b)
            if (d.have.has(b) && --replicas_[b] == 0) --available_;

        while (!d.uploads.empty()) abort_transfer(d.uploads.back());
        while (!d.downloads.empty()) abort_transfer(d.downloads.back());
        const std::vector<int> former = d.neighbors;
        for (int w_id : former) {
            Node& w = nodes_[w_id];
            if (const int t = transfer_between(w, id); t >= 0) abort_transfer(t);
            w.neighbors.erase(std::find(w.neighbors.begin(), w.neighbors.end(), id));
            std::erase(w.unchoked, id);
            std::erase_if(w.received, [id](const auto& r) { return r.first == id; });
            for (int b = 0; b < B_; ++b)
                if (d.have.has(b)) --w.nb_count[b];
        }
        d.neighbors.clear();
        d.unchoked.clear();

        const int pos = live_pos_[id];
        live_[pos] = live_.back();
        live_pos_[live_[pos]] = pos;
        live_.pop_back();

        for (int w_id : former) {
            Node& w = nodes_[w_id];
            if (!w.publisher && static_cast<int>(w.neighbors.size()) < cfg_.peer_set_min) contact_tracker(w_id);
            fill(w_id);
        }
    }

    void gain_block(int d_id, int b) {
        integrate(now_);
        Node& d = nodes_[d_id];
        d.have.set(b);
        ++d.have_count;
        if (now_ >= warm_) ++blocks_after_warmup_;
        if (replicas_[b]++ == 0) ++available_;
        for (int w : d.neighbors) ++nodes_[w].nb_count[b];
        record(TraceKind::BlockComplete, d, b);

        if (d.have_count == B_) {
            d.seed = true;
            --leechers_;
            ++completed_;
            if (std::isinf(cfg_.seed_linger_rate)) {
                depart(d_id);
                return;
            }
            push(draw_exp(cfg_.seed_linger_rate), EventType::Depart, d_id);
        }
        for (int w : std::vector<int>(d.neighbors))
            if (unchokes(nodes_[d_id], w)) fill(w);
    }

    void on_transfer_done(std::uint64_t version) {
        if (version != alloc_version_) return;
        const double eps = 1e-9 * sub_bytes_;
        std::vector<int> finished;
        for (int t : active_)
            if (transfers_[t].remaining <= eps) finished.push_back(t);
        std::sort(finished.begin(), finished.end());
        std::vector<Transfer> done;
        for (int t : finished) {
            done.push_back(transfers_[t]);
            detach(t);
        }
        for (const Transfer& tr : done) {
            Node& d = nodes_[tr.to];
            if (!d.alive) continue;
            ++d.done[tr.block];
            auto it = std::find_if(d.received.begin(), d.received.end(),
                                   [&](const auto& r) { return r.first == tr.from; });
            if (it == d.received.end())
                d.received.emplace_back(tr.from, sub_bytes_);
            else
                it->second += sub_bytes_;
            if (d.done[tr.block] == S_) gain_block(tr.to, tr.block);
        }
        for (const Transfer& tr : done) fill(tr.to);
    }

    /// Rebuild n's unchoke set. A leecher keeps up to r best contributors of
    /// the last round and fills the other slots with random interested
    /// neighbors. A seed (publisher included) has no contributors; it keeps
    /// its active_set_size - 1 most recently unchoked peers that are still
    /// interested and adds one random newcomer, so each unchoke lasts several
    /// rounds and blocks actually get finished.
    void rechoke(int n_id) {
        Node& n = nodes_[n_id];
        std::vector<int> interested;
        for (int d : n.neighbors) {
            const Node& x = nodes_[d];
            if (!x.publisher && !x.seed && n.have.has_block_missing_from(x.have)) interested.push_back(d);
        }
        std::shuffle(interested.begin(), interested.end(), rng_);

        std::vector<int> chosen;
        int optimistic = cfg_.active_set_size;
        if (n.seed) {
            // n.unchoked is ordered most recent first.
            for (int d : n.unchoked) {
                if (static_cast<int>(chosen.size()) == cfg_.active_set_size - 1) break;
                if (std::find(interested.begin(), interested.end(), d) != interested.end()) chosen.push_back(d);
            }
            std::vector<int> fresh;
            for (int d : interested)
                if (std::find(chosen.begin(), chosen.end(), d) == chosen.end()) fresh.push_back(d);
            const int add = std::min<int>(cfg_.active_set_size - static_cast<int>(chosen.size()),
                                          static_cast<int>(fresh.size()));
            chosen.insert(chosen.begin(), fresh.begin(), fresh.begin() + add);
            optimistic = 0;
        } else {
            auto bytes_from = [&](int d) {
                for (const auto& [who, bytes] : n.received)
                    if (who == d) return bytes;
                return 0.0;
            };
            std::vector<int> contributors;
            for (int d : interested)
                if (bytes_from(d) > 0.0) contributors.push_back(d);
            std::stable_sort(contributors.begin(), contributors.end(),
                             [&](int a, int b) { return bytes_from(a) > bytes_from(b); });
            if (static_cast<int>(contributors.size()) > cfg_.reciprocated_slots_max)
                contributors.resize(cfg_.reciprocated_slots_max);
            chosen = contributors;
            optimistic = cfg_.active_set_size - static_cast<int>(chosen.size());
        }
        for (int d : interested) {
            if (optimistic == 0) break;
            if (std::find(chosen.begin(), chosen.end(), d) != chosen.end()) continue;
            chosen.push_back(d);
            --optimistic;
        }

        const std::vector<int> before = n.unchoked;
        n.unchoked = chosen;
        n.received.clear();
        for (int d : before)
            if (std::find(chosen.begin(), chosen.end(), d) == chosen.end())
                if (const int t = transfer_between(nodes_[n_id], d); t >= 0) abort_transfer(t);
        for (int d : before)
            if (std::find(chosen.begin(), chosen.end(), d) == chosen.end()) fill(d);
        for (int d : chosen)
            if (std::find(before.begin(), before.end(), d) == before.end()) fill(d);
        push(now_ + cfg_.round_seconds, EventType::Round, n_id);
    }

    void on_round(int id) {
        if (nodes_[id].alive) rechoke(id);
    }

    SimResult finish() {
        SimResult out;
        SimMetrics& m = out.metrics;
        const double span = horizon_ - warm_;
        m.self_sustainability = span > 0.0 ? sustained_time_ / span : 0.0;
        m.mean_peers = span > 0.0 ? peer_time_ / span : 0.0;
        m.mean_leechers = span > 0.0 ? leecher_time_ / span : 0.0;
        m.effective_mu = leecher_time_ > 0.0 ? blocks_after_warmup_ / leecher_time_ : 0.0;
        m.peers_joined = joined_;
        m.peers_completed = completed_;
        m.peak_upload_ratio = peak_ratio_;

        const double slack = 10.0 * B_ * cfg_.block_bytes / cfg_.peer_upload_Bps;
        for (const Node& n : nodes_)
            if (!n.publisher && n.join_time <= horizon_ - slack && n.have_count < B_) ++m.stalled_peers;

        out.trace = std::move(trace_);
        ReplicaStats rs = replica_stats(out.trace, cfg_.round_seconds);
        m.replica_mean = std::move(rs.replica_mean);
        m.replica_mean_peers_only = std::move(rs.replica_mean_peers_only);
        m.cv_series = std::move(rs.cv_series);
        m.block_download_time = block_time_stats(out.trace);
        m.ownership = ownership_uniformity(out.trace, 500.0, cfg_.rng_seed);
        return out;
    }

    const SimConfig& cfg_;
    const int B_;
    const int S_;
    const double sub_bytes_;
    const double warm_;
    const double horizon_;
    Engine rng_;

    std::vector<Node> nodes_;
    std::vector<int> live_;      // live node ids, publisher included
    std::vector<int> live_pos_;  // position of each id in live_
    std::vector<Transfer> transfers_;
    std::vector<int> active_;  // live transfer indices
    std::vector<int> free_;
    bool dirty_ = false;
    std::uint64_t alloc_version_ = 0;
    double settled_at_ = 0.0;
    std::vector<int> candidates_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;

    std::vector<int> replicas_;  // peer copies of each block, publisher excluded
    int available_ = 0;
    int leechers_ = 0;
    double clock_ = 0.0;
    double sustained_time_ = 0.0;
    double peer_time_ = 0.0;
    double leecher_time_ = 0.0;
    long blocks_after_warmup_ = 0;
    long joined_ = 0;
    long completed_ = 0;
    double peak_ratio_ = 0.0;
    SwarmTrace trace_;
};

}  // namespace detail

/// One replication; `stream` selects the random substream of cfg.rng_seed.
inline SimResult run_swarm(const SimConfig& cfg, std::uint64_t stream = 0) {
    validate(cfg);
    detail::SwarmSimulator sim(cfg, stream);
    return sim.run();
}

}  // namespace sustain
