#pragma once

// Subcommand bodies for the `sustain` tool. Each writes its report to a
// stream and returns the process exit code, so tests can drive them without
// spawning processes:
//   0 ok, 1 failed sweep cells or checks, 2 bad flags/config,
//   3 precision/capability limits, 4 I/O.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sustain/availability.hpp"
#include "sustain/closed_form.hpp"
#include "sustain/error.hpp"
#include "sustain/model_params.hpp"
#include "sustain/parallel.hpp"
#include "sustain/swarm_sim.hpp"
#include "sustain/validation.hpp"

namespace sustain::cli {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kFailed = 1, kBadInput = 2, kCapability = 3, kIo = 4 };

/// Shortest text that reads back to the same double.
inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(num(x)); }

/// "inf", "mu", or a positive rate.
inline Gamma parse_gamma(const std::string& s) {
    if (s == "inf" || s == "infinite") return Gamma::infinite();
    if (s == "mu") return Gamma::equal_mu();
    std::size_t used = 0;
    double r = 0.0;
    try {
        r = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !(r > 0.0)) throw ValidationError("gamma must be inf, mu, or a positive rate, got '" + s + "'");
    return std::isinf(r) ? Gamma::infinite() : Gamma::rate(r);
}

inline std::string gamma_label(const Gamma& g) {
    switch (g.kind()) {
        case Gamma::Kind::Infinite: return "inf";
        case Gamma::Kind::EqualMu: return "mu";
        case Gamma::Kind::Rate: return num(g.value());
    }
    return "?";
}

/// Maps library exceptions to exit codes, printing the message.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const CapabilityError& e) {
        err << "error: " << e.what() << '\n';
        return kCapability;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    }
}

// --- sustain ---------------------------------------------------------------

struct PointArgs {
    int blocks = 0;
    double lambda = 0.0;            ///< per second
    std::vector<double> mu{1.0};
    std::string gamma = "inf";
    double eta = kDefaultEta;
};

inline ModelParams to_params(const PointArgs& a) {
    ModelParams p;
    p.blocks = a.blocks;
    p.lambda = a.lambda;
    p.mu = a.mu;
    p.gamma = parse_gamma(a.gamma);
    return p;
}

inline json sustain_report(const PointArgs& a) {
    const ModelParams p = to_params(a);
    const LoadProfile load = validate(p);
    const AvailDist d = avail_distribution(p, a.eta);
    json r;
    r["B"] = p.blocks;
    r["lambda_per_s"] = p.lambda;
    r["mu"] = p.homogeneous() ? json(p.mu.front()) : json(p.mu);
    r["gamma"] = gamma_label(p.gamma);
    r["rho"] = load.rho;
    r["N"] = d.truncation();
    r["A"] = d.self_sustainability();
    r["trunc_error"] = d.trunc_error();
    r["E_V"] = d.has_distribution() ? json(d.mean()) : json(nullptr);
    if (p.homogeneous() && p.seeds_at_block_rate()) {
        const auto br = bonferroni_bounds(p.blocks, load.rho);
        r["bounds"] = {{"lower", br.lower}, {"upper", br.upper}};
        if (p.blocks <= kClosedFormStableBlocks)
            r["A_closed_form"] = self_sust_closed_seeded(p.blocks, load.rho);
        else
            r["A_closed_form"] = nullptr;
    } else {
        r["bounds"] = nullptr;
    }
    return r;
}

inline int cmd_sustain(const PointArgs& a, const std::string& format, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const json r = sustain_report(a);
        if (format == "json") {
            out << r.dump(2) << '\n';
        } else {
            for (const auto& [k, v] : r.items()) {
                out << k << ": ";
                if (v.is_number_float()) out << num(v.get<double>());
                else if (v.is_string()) out << v.get<std::string>();
                else out << v.dump();
                out << '\n';
            }
        }
        return int(kOk);
    });
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::vector<int> blocks;
    std::vector<double> lambdas;    ///< per second
    double mu = 1.0;
    std::string gamma = "inf";
    double eta = kDefaultEta;
    std::string format = "csv";
    int jobs = 1;
};

struct SweepRow {
    int B = 0;
    double lambda = 0.0, mu = 0.0, rho = NAN, A = NAN, trunc_error = NAN;
    long N = 0;
    std::string gamma, error;
};

inline std::vector<SweepRow> sweep_rows(const SweepArgs& a) {
    const std::size_t L = a.lambdas.size();
    return parallel_map<SweepRow>(a.blocks.size() * L, a.jobs, [&](std::size_t i) {
        SweepRow row;
        row.B = a.blocks[i / L];
        row.lambda = a.lambdas[i % L];
        row.mu = a.mu;
        row.gamma = a.gamma;
        try {
            const ModelParams p = to_params({row.B, row.lambda, {a.mu}, a.gamma, a.eta});
            row.gamma = gamma_label(p.gamma);
            row.rho = validate(p).rho;
            const AvailDist d = avail_distribution(p, a.eta);
            row.N = d.truncation();
            row.A = d.self_sustainability();
            row.trunc_error = d.trunc_error();
        } catch (const std::exception& e) {
            row.error = e.what();
            row.A = NAN;
        }
        return row;
    });
}

inline int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    if (a.blocks.empty() || a.lambdas.empty()) {
        err << "error: sweep needs at least one block count and one arrival rate\n";
        return kBadInput;
    }
    const auto rows = sweep_rows(a);
    int failed = 0;
    for (const auto& r : rows)
        if (!r.error.empty()) {
            ++failed;
            err << "cell B=" << r.B << " lambda=" << num(r.lambda) << ": " << r.error << '\n';
        }
    if (a.format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"B", r.B}, {"lambda_per_s", r.lambda}, {"mu", r.mu}, {"gamma", r.gamma},
                           {"rho", jnum(r.rho)}, {"N", r.N}, {"A", jnum(r.A)}, {"trunc_error", jnum(r.trunc_error)}});
        out << arr.dump(2) << '\n';
    } else {
        out << "B,lambda_per_s,mu,gamma,rho,N,A,trunc_error\n";
        for (const auto& r : rows)
            out << r.B << ',' << num(r.lambda) << ',' << num(r.mu) << ',' << r.gamma << ',' << num(r.rho) << ','
                << r.N << ',' << num(r.A) << ',' << num(r.trunc_error) << '\n';
    }
    if (failed) {
        err << failed << " of " << rows.size() << " cells failed\n";
        return kFailed;
    }
    return kOk;
}

// --- minload ---------------------------------------------------------------

inline int cmd_minload(int blocks, double target, const std::string& mode, double eta, const std::string& format,
                       std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (mode != "approx" && mode != "exact") throw ValidationError("mode must be approx or exact");
        const MinLoadResult m = min_load(blocks, target, mode == "exact" ? MinLoadMode::Exact : MinLoadMode::Approx, eta);
        json r{{"B", blocks}, {"target", target}, {"mode", mode}, {"rho", m.rho}, {"coverage", m.coverage},
               {"achieved", m.achieved ? json(*m.achieved) : json(nullptr)}};
        if (format == "json") {
            out << r.dump(2) << '\n';
        } else {
            out << "rho: " << num(m.rho) << "\ncoverage: " << num(m.coverage) << '\n';
            if (m.achieved) out << "achieved: " << num(*m.achieved) << '\n';
        }
        return int(kOk);
    });
}

// --- simulate --------------------------------------------------------------

namespace detail {

inline double rate_or_inf(const json& v, const std::string& key) {
    if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw ValidationError("config key '" + key + "' must be a number or \"inf\"");
    return v.get<double>();
}

template <typename T>
T typed(const json& v, const std::string& key) {
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ValidationError("config key '" + key + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>)
            if (v.is_number_integer() && !v.is_number_unsigned()) throw ValidationError("config key '" + key + "' must be >= 0");
    } else if (!v.is_number()) {
        throw ValidationError("config key '" + key + "' must be a number");
    }
    return v.get<T>();
}

}  // namespace detail

/// Exact SimConfig field names; anything else is rejected.
inline SimConfig parse_sim_config(const json& doc) {
    if (!doc.is_object()) throw ValidationError("simulation config must be a JSON object");
    SimConfig c;
    for (const auto& [key, v] : doc.items()) {
        using detail::typed;
        if (key == "B") c.B = typed<int>(v, key);
        else if (key == "block_bytes") c.block_bytes = typed<double>(v, key);
        else if (key == "subblocks_per_block") c.subblocks_per_block = typed<int>(v, key);
        else if (key == "peer_set_target") c.peer_set_target = typed<int>(v, key);
        else if (key == "peer_set_min") c.peer_set_min = typed<int>(v, key);
        else if (key == "active_set_size") c.active_set_size = typed<int>(v, key);
        else if (key == "reciprocated_slots_max") c.reciprocated_slots_max = typed<int>(v, key);
        else if (key == "round_seconds") c.round_seconds = typed<double>(v, key);
        else if (key == "first_random_blocks") c.first_random_blocks = typed<int>(v, key);
        else if (key == "peer_upload_Bps") c.peer_upload_Bps = typed<double>(v, key);
        else if (key == "publisher_upload_Bps") c.publisher_upload_Bps = typed<double>(v, key);
        else if (key == "peer_download_Bps") c.peer_download_Bps = detail::rate_or_inf(v, key);
        else if (key == "lambda") c.lambda = typed<double>(v, key);
        else if (key == "seed_linger_rate") c.seed_linger_rate = detail::rate_or_inf(v, key);
        else if (key == "horizon_seconds") c.horizon_seconds = typed<double>(v, key);
        else if (key == "warmup_fraction") c.warmup_fraction = typed<double>(v, key);
        else if (key == "rng_seed") c.rng_seed = typed<std::uint64_t>(v, key);
        else throw ValidationError("unknown config key '" + key + "'");
    }
    validate(c);
    return c;
}

inline SimConfig load_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot read config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return parse_sim_config(doc);
}

/// Metrics averaged over replications; ownership histograms are pooled and
/// download-time means weighted by sample count.
inline SimMetrics pool_metrics(const std::vector<SimMetrics>& runs) {
    SimMetrics p;
    if (runs.empty()) return p;
    const double R = static_cast<double>(runs.size());
    const std::size_t B = runs.front().replica_mean.size();
    p.replica_mean.assign(B, 0.0);
    p.replica_mean_peers_only.assign(B, 0.0);
    p.block_download_time.assign(runs.front().block_download_time.size(), {});
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& m = runs[i];
        p.self_sustainability += m.self_sustainability / R;
        p.mean_peers += m.mean_peers / R;
        p.mean_leechers += m.mean_leechers / R;
        p.effective_mu += m.effective_mu / R;
        p.peers_joined += m.peers_joined;
        p.peers_completed += m.peers_completed;
        p.stalled_peers += m.stalled_peers;
        p.peak_upload_ratio = std::max(p.peak_upload_ratio, m.peak_upload_ratio);
        for (std::size_t b = 0; b < B && b < m.replica_mean.size(); ++b) {
            p.replica_mean[b] += m.replica_mean[b] / R;
            p.replica_mean_peers_only[b] += m.replica_mean_peers_only[b] / R;
        }
        p.cv_series.insert(p.cv_series.end(), m.cv_series.begin(), m.cv_series.end());
        for (std::size_t h = 0; h < p.block_download_time.size() && h < m.block_download_time.size(); ++h) {
            auto& acc = p.block_download_time[h];
            const auto& s = m.block_download_time[h];
            if (s.count == 0) continue;
            acc.min = acc.count ? std::min(acc.min, s.min) : s.min;
            acc.max = acc.count ? std::max(acc.max, s.max) : s.max;
            acc.mean = (acc.mean * acc.count + s.mean * s.count) / (acc.count + s.count);
            acc.count += s.count;
        }
        if (i == 0) p.ownership = m.ownership;
        else pool(p.ownership, m.ownership);
    }
    return p;
}

inline json hist_json(const UniformityHist& h) {
    return {{"counts", h.counts}, {"samples", h.samples}, {"chi2", h.chi2}, {"dof", h.dof}, {"p_value", h.p_value}};
}

inline json metrics_json(const std::string& label, const SimMetrics& m, bool pooled) {
    json times = json::array();
    for (std::size_t h = 0; h < m.block_download_time.size(); ++h) {
        const auto& s = m.block_download_time[h];
        json t{{"h", h + 1}, {"count", s.count}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}};
        if (!pooled) {
            t["q1"] = s.q1;
            t["median"] = s.median;
            t["q3"] = s.q3;
        }
        times.push_back(t);
    }
    return {{"replication", label},
            {"self_sustainability", m.self_sustainability},
            {"mean_peers", m.mean_peers},
            {"mean_leechers", m.mean_leechers},
            {"effective_mu", m.effective_mu},
            {"peers_joined", m.peers_joined},
            {"peers_completed", m.peers_completed},
            {"stalled_peers", m.stalled_peers},
            {"peak_upload_ratio", m.peak_upload_ratio},
            {"replica_mean", m.replica_mean},
            {"replica_mean_peers_only", m.replica_mean_peers_only},
            {"cv_series", m.cv_series},
            {"block_download_time", times},
            {"first_block_hist", hist_json(m.ownership.first_block)},
            {"last_block_hist", hist_json(m.ownership.last_block)},
            {"first_pair_hist", hist_json(m.ownership.first_pair)}};
}

inline void write_sim_csv(std::ostream& out, const std::vector<std::pair<std::string, SimMetrics>>& rows, int B) {
    out << "replication,self_sustainability,mean_peers,mean_leechers,effective_mu,peers_joined,peers_completed,"
           "stalled_peers,peak_upload_ratio,cv_mean,first_block_p,last_block_p,first_pair_p";
    for (int b = 0; b < B; ++b) out << ",replica_mean_" << b;
    for (int h = 1; h <= B; ++h) out << ",block_time_mean_" << h;
    out << '\n';
    for (const auto& [label, m] : rows) {
        double cv = 0.0;
        for (double c : m.cv_series) cv += c / m.cv_series.size();
        out << label << ',' << num(m.self_sustainability) << ',' << num(m.mean_peers) << ','
            << num(m.mean_leechers) << ',' << num(m.effective_mu) << ',' << m.peers_joined << ','
            << m.peers_completed << ',' << m.stalled_peers << ',' << num(m.peak_upload_ratio) << ',' << num(cv)
            << ',' << num(m.ownership.first_block.p_value) << ',' << num(m.ownership.last_block.p_value) << ','
            << num(m.ownership.first_pair.p_value);
        for (int b = 0; b < B; ++b)
            out << ',' << num(b < static_cast<int>(m.replica_mean.size()) ? m.replica_mean[b] : 0.0);
        for (int h = 0; h < B; ++h)
            out << ',' << num(h < static_cast<int>(m.block_download_time.size()) ? m.block_download_time[h].mean : 0.0);
        out << '\n';
    }
}

struct SimulateArgs {
    std::string config;
    int replications = 10;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string trace_prefix;   ///< writes <prefix><i>.trace per replication when set
    int jobs = 1;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        SimConfig cfg = load_sim_config(a.config);
        if (a.seed) cfg.rng_seed = *a.seed;
        if (a.replications < 1) throw ValidationError("--replications must be at least 1");
        const auto results = parallel_map<SimMetrics>(static_cast<std::size_t>(a.replications), a.jobs, [&](std::size_t i) {
            SimResult r = run_swarm(cfg, i + 1);
            if (!a.trace_prefix.empty()) write_trace(r.trace, a.trace_prefix + std::to_string(i + 1) + ".trace");
            return std::move(r.metrics);
        });
        std::vector<std::pair<std::string, SimMetrics>> rows;
        for (std::size_t i = 0; i < results.size(); ++i) rows.emplace_back(std::to_string(i + 1), results[i]);
        rows.emplace_back("pooled", pool_metrics(results));
        if (a.format == "json") {
            json arr = json::array();
            for (const auto& [label, m] : rows) arr.push_back(metrics_json(label, m, label == "pooled"));
            out << arr.dump(2) << '\n';
        } else {
            write_sim_csv(out, rows, cfg.B);
        }
        return int(kOk);
    });
}

// --- validate --------------------------------------------------------------

inline int cmd_validate(const ValidationOptions& opt, const std::string& format, std::ostream& out,
                        std::ostream& err, const Engines& engines = {}) {
    (void)err;
    int failed = 0;
    json arr = json::array();
    const auto results = run_validation(opt, engines, [&](const CheckResult& r) {
        failed += !r.pass;
        if (format == "json") {
            arr.push_back({{"name", r.name}, {"pass", r.pass}, {"tolerance", r.tolerance},
                           {"deviation", jnum(r.deviation)}, {"detail", r.detail}, {"seconds", r.seconds}});
            return;
        }
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2fs", r.seconds);
        char dev[32];
        std::snprintf(dev, sizeof dev, "%.4g", r.deviation);
        out << (r.pass ? "PASS " : "FAIL ") << r.name << "  [" << r.tolerance << "]  deviation " << dev;
        if (!r.detail.empty()) out << "  (" << r.detail << ")";
        out << "  " << secs << std::endl;
    });
    if (format == "json") out << arr.dump(2) << '\n';
    else out << (results.size() - failed) << '/' << results.size() << " checks passed\n";
    return failed ? kFailed : kOk;
}

}  // namespace sustain::cli
