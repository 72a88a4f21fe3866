#pragma once

// Cross-engine consistency checks behind `sustain validate`. The quick level
// is deterministic math (recursions, closed forms, kernels, oracles, design
// formulas); the full level adds Monte Carlo, the CTMC and the swarm
// simulator. Engines are passed in so a deliberately broken recursion can be
// shown to trip its check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sustain/availability.hpp"
#include "sustain/closed_form.hpp"
#include "sustain/cond_avail.hpp"
#include "sustain/oracle.hpp"
#include "sustain/parallel.hpp"
#include "sustain/psi.hpp"
#include "sustain/swarm_sim.hpp"

namespace sustain {

struct CheckResult {
    std::string name;
    std::string tolerance;   ///< what "pass" means, human readable
    double deviation = 0.0;  ///< worst observed deviation for that tolerance
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Engines {
    std::function<CondAvailTable(int, int)> fast = [](int B, int N) { return cond_avail_fast(B, N); };
    std::function<CondAvailTable(int, int)> lemma = [](int B, int N) { return cond_avail_lemma(B, N); };
    std::function<CondAvailTable(int, int)> seeded = [](int B, int N) { return cond_avail_fast_seeded(B, N); };
};

enum class ValidationLevel { Quick, Full };

struct ValidationOptions {
    ValidationLevel level = ValidationLevel::Quick;
    int jobs = 1;
    int sim_replications = 10;
    double sim_horizon = 10000.0;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

inline std::string detail_sep(const std::string& d) { return d.empty() ? "" : "; "; }

/// Runs body, stamps the elapsed time, and turns exceptions into failures.
inline CheckResult timed(const std::string& name, const std::string& tol,
                         const std::function<void(CheckResult&)>& body, double max_seconds = 0.0) {
    CheckResult r;
    r.name = name;
    r.tolerance = tol;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.deviation = std::numeric_limits<double>::infinity();
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (max_seconds > 0.0 && r.seconds > max_seconds) {
        r.pass = false;
        r.detail += detail_sep(r.detail) + fmt("took %.1f s, limit %.0f s", r.seconds, max_seconds);
    }
    return r;
}

inline double max_table_diff(const CondAvailTable& a, const CondAvailTable& b) {
    double worst = 0.0;
    for (int n = 0; n <= a.max_users(); ++n)
        for (int v = 0; v <= a.blocks(); ++v) worst = std::max(worst, std::abs(a(n, v) - b(n, v)));
    return worst;
}

inline AvailDist seeded_dist(const Engines& eng, int B, double rho, double eta) {
    const double mean = (B + 1) * rho;
    const long N = choose_truncation(mean, eta);
    return AvailDist(B, mix_over_population(eng.seeded(B, static_cast<int>(N)), mean),
                     poisson_upper_tail(mean, N), N, GammaMode::EqualMu);
}

inline void for_each_stage_vector(int B, int max_users, const std::function<void(const StageVector&)>& f) {
    StageVector s;
    s.n.assign(B + 1, 0);
    std::function<void(int, int)> rec = [&](int h, int left) {
        if (h > B) {
            f(s);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            s.n[h] = c;
            rec(h + 1, left - c);
        }
        s.n[h] = 0;
    };
    rec(0, max_users);
}

}  // namespace detail

// --- deterministic checks --------------------------------------------------

inline CheckResult check_recursion_vs_lemma(const Engines& eng = {}) {
    return detail::timed("recursion-vs-lemma", "|dp| <= 1e-10, B<=20, N<=50", [&](CheckResult& r) {
        for (int B = 1; B <= 20; ++B) r.deviation = std::max(r.deviation, detail::max_table_diff(eng.fast(B, 50), eng.lemma(B, 50)));
        r.pass = r.deviation <= 1e-10;
    }, 10.0);
}

inline CheckResult check_closed_conditional(const Engines& eng = {}) {
    return detail::timed("closed-form-conditional", "|dp| <= 1e-8, B<=30, n<=30", [&](CheckResult& r) {
        for (int B = 1; B <= 30; ++B) {
            const auto seeded = eng.seeded(B, 30);
            const auto inf = eng.fast(B, 30);
            for (int n = 1; n <= 30; ++n)
                for (int v = 0; v <= B; ++v) {
                    r.deviation = std::max(r.deviation, std::abs(cond_avail_closed_seeded(B, n, v) - seeded(n, v)));
                    r.deviation = std::max(r.deviation, std::abs(cond_avail_closed_inf(B, n, v) - inf(n, v)));
                }
        }
        r.pass = r.deviation <= 1e-8;
    }, 10.0);
}

inline CheckResult check_closed_self_sustainability(const Engines& eng = {}) {
    return detail::timed("closed-form-self-sustainability", "|dA| <= 1e-7, B<=30, rho in {0.25,0.5,1,2}",
                         [&](CheckResult& r) {
        for (int B = 1; B <= 30; ++B)
            for (double rho : {0.25, 0.5, 1.0, 2.0}) {
                const double rec = detail::seeded_dist(eng, B, rho, 1e-14).self_sustainability();
                r.deviation = std::max(r.deviation, std::abs(self_sust_closed_seeded(B, rho) - rec));
            }
        r.pass = r.deviation <= 1e-7;
    }, 10.0);
}

inline CheckResult check_psi_identities() {
    return detail::timed("psi-identities",
                         "row sums 1e-12, tail-sum identity 1e-10, recursion vs direct 1e-12; B<=256",
                         [&](CheckResult& r) {
        double rows = 0.0, tails = 0.0, rec = 0.0;
        for (int B = 1; B <= 256; B = B < 64 ? B + 1 : B * 2) {
            const PsiKernel psi = psi_recursive(B, B);
            for (int h = 0; h <= B; ++h)
                for (int k = 0; k <= B; ++k) {
                    double sum = 0.0;
                    for (double x : psi.row(h, k)) sum += x;
                    rows = std::max(rows, std::abs(sum - 1.0));
                    const auto [lo, hi] = psi_support(B, h, k);
                    for (int v = lo; v <= hi; ++v)
                        rec = std::max(rec, std::abs(psi(h, k, v) - psi_direct(B, h, k, v)));
                }
        }
        for (int B = 1; B <= 256; B = B < 16 ? B + 1 : B * 2)
            for (int k = 0; k <= B; ++k)
                for (int v = k; v <= B; ++v)
                    tails = std::max(tails, std::abs(psi_tail_sum(B, k, v) - psi_tail_sum_identity(B, k, v)));
        r.pass = rows <= 1e-12 && tails <= 1e-10 && rec <= 1e-12;
        r.detail = detail::fmt("row %.2e tail %.2e rec %.2e", rows, tails, rec);
        r.deviation = std::max({rows, tails, rec});
    }, 30.0);
}

inline CheckResult check_oracles() {
    return detail::timed("oracle-agreement", "|dp| <= 1e-12, B<=4, users<=4", [&](CheckResult& r) {
        for (int B = 1; B <= 4; ++B)
            detail::for_each_stage_vector(B, 4, [&](const StageVector& s) {
                const auto analytic = cond_dist_given_stages(B, s.n);
                const auto counted = enumerate_cond_dist(B, s);
                for (int v = 0; v <= B; ++v) r.deviation = std::max(r.deviation, std::abs(analytic[v] - counted[v]));
                r.deviation = std::max(r.deviation, std::abs(exact_all_available(B, s) - analytic[B]));
            });
        r.pass = r.deviation <= 1e-12;
    });
}

inline CheckResult check_moments() {
    return detail::timed("tagged-block-and-moments", "tagged 1e-14; E[V] 1e-6 relative, B<=30", [&](CheckResult& r) {
        double tagged = 0.0, moment = 0.0;
        for (int B = 1; B <= 30; ++B)
            for (double rho : {0.1, 0.25, 0.5, 1.0, 2.0}) {
                const double q1 = tagged_unavail_prob(B, rho, 1).prob;
                tagged = std::max(tagged, std::abs(q1 - (1.0 - mean_available(B, rho, GammaMode::EqualMu) / B)));
                tagged = std::max(tagged, std::abs(tagged_unavail_prob(B, rho, B).prob - std::exp(-rho * B)));
                const double mean = avail_distribution(ModelParams::homogeneous_params(B, rho, 1.0, Gamma::equal_mu()), 1e-14).mean();
                const double closed = mean_available(B, rho, GammaMode::EqualMu);
                moment = std::max(moment, std::abs(closed - mean) / std::max(closed, 1e-300));
            }
        r.pass = tagged <= 1e-14 && moment <= 1e-6;
        r.deviation = std::max(tagged, moment);
        r.detail = detail::fmt("tagged %.2e moment %.2e", tagged, moment);
    });
}

inline CheckResult check_bounds_monotone() {
    return detail::timed("bounds-and-monotonicity",
                         "Bonferroni bracket; A(B+1) >= A(B) for rho>=1.6, 4<=B<=64; A increasing in rho",
                         [&](CheckResult& r) {
        const std::vector<double> rhos{0.05, 0.1, 0.25, 0.5, 1.0, 1.6, 2.0, 3.0};
        int violations = 0;
        double worst = 0.0;
        std::vector<std::vector<double>> A(66, std::vector<double>(rhos.size()));
        for (int B = 1; B <= 65; ++B)
            for (std::size_t i = 0; i < rhos.size(); ++i) {
                A[B][i] = avail_distribution(ModelParams::homogeneous_params(B, rhos[i], 1.0, Gamma::equal_mu()), 1e-14)
                              .self_sustainability();
                const auto br = bonferroni_bounds(B, rhos[i]);
                const double miss = std::max(br.lower - A[B][i], A[B][i] - br.upper);
                if (miss > 1e-12) ++violations;
                worst = std::max(worst, miss);
                if (i > 0 && A[B][i] < A[B][i - 1] - 1e-12) ++violations;
            }
        for (int B = 4; B <= 64; ++B)
            for (std::size_t i = 0; i < rhos.size(); ++i)
                if (rhos[i] >= 1.6 && A[B + 1][i] < A[B][i] - 1e-12) ++violations;
        r.pass = violations == 0;
        r.deviation = violations;
        r.detail = detail::fmt("%.0f violations, worst bracket excess %.2e", violations, worst);
    }, 60.0);
}

inline CheckResult check_heterogeneous(std::uint64_t seed = 1) {
    return detail::timed("heterogeneous-fast-vs-direct", "|dp| <= 1e-8 on 20 random instances and equal rates",
                         [&](CheckResult& r) {
        Engine rng = make_engine(seed, 0x4e7);
        std::uniform_int_distribution<int> blocks(2, 12), trunc(0, 15);
        std::uniform_real_distribution<double> rate(0.2, 3.0), load(0.05, 2.0);
        for (int i = 0; i < 20; ++i) {
            ModelParams p;
            p.blocks = blocks(rng);
            p.lambda = load(rng);
            p.mu.resize(p.blocks);
            for (double& m : p.mu) m = rate(rng);
            const int M = trunc(rng);
            const AvailDist slow_d = het_avail(p, M), fast_d = het_avail_fast(p, M);
            const auto slow = slow_d.p(), fast = fast_d.p();
            for (std::size_t v = 0; v < slow.size(); ++v) r.deviation = std::max(r.deviation, std::abs(slow[v] - fast[v]));
        }
        for (int B : {2, 5, 8, 12, 16})
            for (double rho : {0.2, 0.7, 1.5}) {
                ModelParams p = ModelParams::homogeneous_params(B, rho, 1.0);
                const AvailDist ref_d = avail_distribution(p, 1e-14);
                p.mu.assign(B, 1.0);
                const AvailDist het_d = het_avail_fast(p, default_stage_truncation(p, 1e-14));
                const auto ref = ref_d.p(), het = het_d.p();
                for (int v = 0; v <= B; ++v) r.deviation = std::max(r.deviation, std::abs(ref[v] - het[v]));
            }
        r.pass = r.deviation <= 1e-8;
    });
}

inline CheckResult check_min_load() {
    return detail::timed("min-load-coverage",
                         "coverage(A*=0.999) 20 at B=10 and 29 at B=1000 within 15%; approx vs exact within 20%",
                         [&](CheckResult& r) {
        const double c10 = min_load(10, 0.999, MinLoadMode::Exact).coverage;
        const double c1000 = min_load(1000, 0.999, MinLoadMode::Exact).coverage;
        double worst = std::max(std::abs(c10 / 20.0 - 1.0), std::abs(c1000 / 29.0 - 1.0));
        bool ok = worst <= 0.15;
        double approx_gap = 0.0;
        for (int B : {16, 50, 100, 200, 1000})
            for (double target : {0.99, 0.999}) {
                const double exact = min_load(B, target, MinLoadMode::Exact).rho;
                const double approx = min_load(B, target, MinLoadMode::Approx).rho;
                approx_gap = std::max(approx_gap, std::abs(approx - exact) / exact);
            }
        ok = ok && approx_gap <= 0.20;
        r.pass = ok;
        r.deviation = std::max(worst, approx_gap);
        r.detail = detail::fmt("coverage B=10 %.2f, B=1000 %.2f, approx gap %.3f", c10, c1000, approx_gap);
    });
}

// --- stochastic checks -----------------------------------------------------

inline CheckResult check_monte_carlo(double rho, std::uint64_t seed) {
    return detail::timed(detail::fmt("monte-carlo-B8-rho%.2f", rho), "analytic A inside 99% CI, 1e5 samples",
                         [&](CheckResult& r) {
        const auto p = ModelParams::homogeneous_params(8, rho, 1.0);
        const double A = avail_distribution(p, 1e-14).self_sustainability();
        const auto mc = mc_avail_dist(p, 100000, seed);
        r.pass = mc.covers(8, A);
        r.deviation = std::abs(mc.self_sustainability() - A);
        r.detail = detail::fmt("A %.5f, MC %.5f +- %.5f", A, mc.self_sustainability(), mc.half_width[8]);
    });
}

inline CheckResult check_ctmc(double rho, std::uint64_t seed, int jobs) {
    return detail::timed(detail::fmt("ctmc-B8-rho%.2f", rho), "analytic A within 3 SE, 10 x 5e4 s",
                         [&](CheckResult& r) {
        const auto p = ModelParams::homogeneous_params(8, rho, 1.0);
        const double A = avail_distribution(p, 1e-14).self_sustainability();
        const auto runs = parallel_map<double>(10, jobs, [&](std::size_t i) {
            return ctmc_simulate(p, 5e4, seed + 1000 * (i + 1)).self_sustainability;
        });
        double mean = 0.0, sq = 0.0;
        for (double x : runs) mean += x / runs.size();
        for (double x : runs) sq += (x - mean) * (x - mean);
        const double se = std::sqrt(sq / (runs.size() - 1) / runs.size());
        r.deviation = std::abs(mean - A) / se;
        r.pass = r.deviation <= 3.0;
        r.detail = detail::fmt("A %.5f, CTMC %.5f, se %.5f", A, mean, se);
    });
}

struct SwarmPoint {
    double lambda_per_min = 0.0;
    double model_A = 0.0;
    double sim_A = 0.0;
    double sim_se = 0.0;
    double effective_mu = 0.0;
    std::vector<SimMetrics> runs;
};

/// Replications 1..R of the default swarm at lambda peers/minute.
inline SwarmPoint run_swarm_point(double lambda_per_min, int replications, double horizon, std::uint64_t seed,
                                  int jobs) {
    SimConfig cfg;
    cfg.lambda = lambda_per_min / 60.0;
    cfg.horizon_seconds = horizon;
    cfg.rng_seed = seed;
    SwarmPoint pt;
    pt.lambda_per_min = lambda_per_min;
    pt.model_A = avail_distribution(ModelParams::homogeneous_params(cfg.B, cfg.lambda, cfg.nominal_mu()), 1e-12)
                     .self_sustainability();
    pt.runs = parallel_map<SimMetrics>(static_cast<std::size_t>(replications), jobs, [&](std::size_t i) {
        return run_swarm(cfg, i + 1).metrics;
    });
    double sq = 0.0;
    for (const auto& m : pt.runs) {
        pt.sim_A += m.self_sustainability / replications;
        pt.effective_mu += m.effective_mu / replications;
    }
    for (const auto& m : pt.runs) sq += (m.self_sustainability - pt.sim_A) * (m.self_sustainability - pt.sim_A);
    pt.sim_se = replications > 1 ? std::sqrt(sq / (replications - 1) / replications) : 0.0;
    return pt;
}

inline CheckResult check_swarm_point(const SwarmPoint& pt) {
    return detail::timed(detail::fmt("swarm-vs-model-lambda%.0f", pt.lambda_per_min), "|A_sim - A_model| <= 0.1 (and 0.1 +- 0.1 at 1/min, >= 0.9 at 8/min)",
                         [&](CheckResult& r) {
        r.deviation = std::abs(pt.sim_A - pt.model_A);
        r.pass = r.deviation <= 0.1;
        // anchor points read off the paper's population plot
        if (pt.lambda_per_min == 1.0) r.pass = r.pass && std::abs(pt.sim_A - 0.1) <= 0.1;
        if (pt.lambda_per_min == 8.0) r.pass = r.pass && pt.sim_A >= 0.9;
        r.detail = detail::fmt("model %.4f, sim %.4f +- %.4f", pt.model_A, pt.sim_A, pt.sim_se);
    });
}

/// Replica balance, c_t, per-index download times and ownership uniformity
/// on one batch of replications.
struct SwarmInternals {
    double replica_target = 0.0;   ///< rho (B-1)/2 + 1 with rho = lambda / effective mu
    double replica_worst = 0.0;    ///< max relative deviation of a block's mean
    double cv_fraction = 0.0;      ///< fraction of c_t samples below 0.8
    double time_spread = 0.0;      ///< max relative deviation of h=2..B-1 means from their average
    double first_block_mean = 0.0;
    double rest_median = 0.0;
    double chi_first = 0.0, chi_last = 0.0, chi_pair = 0.0;
    std::vector<double> time_means;
};

inline SwarmInternals swarm_internals(const SwarmPoint& pt, int B = 16) {
    SwarmInternals s;
    const double rho = pt.lambda_per_min / 60.0 / pt.effective_mu;
    s.replica_target = rho * (B - 1) / 2.0 + 1.0;
    std::vector<double> rep(B, 0.0), times(B, 0.0);
    std::vector<long> counts(B, 0);
    long cv_ok = 0, cv_all = 0;
    OwnershipHists own;
    for (std::size_t i = 0; i < pt.runs.size(); ++i) {
        const auto& m = pt.runs[i];
        for (int b = 0; b < B; ++b) rep[b] += m.replica_mean[b] / pt.runs.size();
        for (double c : m.cv_series) cv_ok += c < 0.8, ++cv_all;
        for (int h = 0; h < B; ++h) {
            times[h] += m.block_download_time[h].mean * m.block_download_time[h].count;
            counts[h] += m.block_download_time[h].count;
        }
        if (i == 0)
            own = m.ownership;
        else
            pool(own, m.ownership);
    }
    for (int b = 0; b < B; ++b) s.replica_worst = std::max(s.replica_worst, std::abs(rep[b] / s.replica_target - 1.0));
    s.cv_fraction = cv_all ? static_cast<double>(cv_ok) / cv_all : 0.0;
    s.time_means.resize(B);
    for (int h = 0; h < B; ++h) s.time_means[h] = counts[h] ? times[h] / counts[h] : 0.0;
    double avg = 0.0;
    for (int h = 1; h < B - 1; ++h) avg += s.time_means[h] / (B - 2);
    for (int h = 1; h < B - 1; ++h) s.time_spread = std::max(s.time_spread, std::abs(s.time_means[h] / avg - 1.0));
    s.first_block_mean = s.time_means[0];
    std::vector<double> rest(s.time_means.begin() + 1, s.time_means.end());
    s.rest_median = summarize(rest).median;
    s.chi_first = own.first_block.p_value;
    s.chi_last = own.last_block.p_value;
    s.chi_pair = own.first_pair.p_value;
    return s;
}

inline std::vector<CheckResult> check_swarm_internals(const SwarmPoint& pt) {
    const SwarmInternals s = swarm_internals(pt);
    std::vector<CheckResult> out;
    out.push_back(detail::timed("swarm-replica-balance", "per-block replica mean within 25% of rho(B-1)/2+1",
                                [&](CheckResult& r) {
        r.deviation = s.replica_worst;
        r.pass = s.replica_worst <= 0.25;
        r.detail = detail::fmt("target %.3f (rho from effective mu %.4f)", s.replica_target, pt.effective_mu);
    }));
    out.push_back(detail::timed("swarm-cv", "c_t < 0.8 in >= 90% of samples", [&](CheckResult& r) {
        r.deviation = s.cv_fraction;
        r.pass = s.cv_fraction >= 0.9;
    }));
    out.push_back(detail::timed("swarm-block-times", "means h=2..B-1 within 30% of their average; first block slower",
                                [&](CheckResult& r) {
        r.deviation = s.time_spread;
        r.pass = s.time_spread <= 0.30 && s.first_block_mean > s.rest_median;
        r.detail = detail::fmt("first %.2f s, median of rest %.2f s", s.first_block_mean, s.rest_median);
    }));
    out.push_back(detail::timed("swarm-ownership-uniformity", "chi-square p > 0.001 for first, last, pair",
                                [&](CheckResult& r) {
        r.deviation = std::min({s.chi_first, s.chi_last, s.chi_pair});
        r.pass = r.deviation > 0.001;
        r.detail = detail::fmt("p first %.4f last %.4f pair %.4f", s.chi_first, s.chi_last, s.chi_pair);
    }));
    return out;
}

// --- registry --------------------------------------------------------------

inline std::vector<CheckResult> run_validation(const ValidationOptions& opt, const Engines& eng = {},
                                               const std::function<void(const CheckResult&)>& progress = {}) {
    std::vector<CheckResult> out;
    auto add = [&](CheckResult r) {
        if (progress) progress(r);
        out.push_back(std::move(r));
    };
    add(check_recursion_vs_lemma(eng));
    add(check_closed_conditional(eng));
    add(check_closed_self_sustainability(eng));
    add(check_psi_identities());
    add(check_oracles());
    add(check_moments());
    add(check_bounds_monotone());
    add(check_heterogeneous(opt.seed));
    add(check_min_load());
    if (opt.level == ValidationLevel::Quick) return out;

    for (double rho : {0.5, 1.0}) {
        add(check_monte_carlo(rho, opt.seed));
        add(check_ctmc(rho, opt.seed, opt.jobs));
    }
    std::vector<SwarmPoint> points;
    for (double lam : {1.0, 4.0, 8.0}) {
        points.push_back(run_swarm_point(lam, opt.sim_replications, opt.sim_horizon, opt.seed, opt.jobs));
        add(check_swarm_point(points.back()));
    }
    add(detail::timed("swarm-monotone-in-lambda", "A_sim strictly increasing over lambda = 1, 4, 8 /min",
                      [&](CheckResult& r) {
        r.pass = points[0].sim_A < points[1].sim_A && points[1].sim_A < points[2].sim_A;
        r.deviation = std::min(points[1].sim_A - points[0].sim_A, points[2].sim_A - points[1].sim_A);
    }));
    for (auto& r : check_swarm_internals(points[1])) add(std::move(r));
    return out;
}

}  // namespace sustain
