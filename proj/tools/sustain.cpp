// sustain: self-sustainability of P2P swarms from the command line.

#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

using namespace sustain;
using namespace sustain::cli;

/// Stdout unless --output names a file.
struct Sink {
    std::ofstream file;
    std::ostream* out = &std::cout;

    bool open(const std::string& path) {
        if (path.empty() || path == "-") return true;
        file.open(path);
        out = &file;
        return static_cast<bool>(file);
    }
};

double per_second(double value, bool per_minute) { return per_minute ? value / 60.0 : value; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-sustainability of peer-to-peer swarms"};
    app.require_subcommand(1);
    int jobs = default_jobs();
    std::string output, format;
    app.add_option("--jobs,-j", jobs, "worker threads (default: SUSTAIN_JOBS or hardware threads)")
        ->check(CLI::PositiveNumber);

    // sustain
    auto* sus = app.add_subcommand("sustain", "self-sustainability at one operating point");
    PointArgs point;
    double lambda_min = -1.0;
    std::string mu_text = "1";
    sus->add_option("--blocks,-B", point.blocks, "number of blocks")->required();
    auto* lam_s = sus->add_option("--lambda", point.lambda, "arrivals per second");
    auto* lam_m = sus->add_option("--lambda-per-min", lambda_min, "arrivals per minute");
    lam_s->excludes(lam_m);
    sus->add_option("--mu", mu_text, "block download rate, or a comma list with one rate per block");
    sus->add_option("--gamma", point.gamma, "seed departure rate: inf, mu, or a rate");
    sus->add_option("--eta", point.eta, "truncation tolerance");
    sus->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    // sweep
    auto* swp = app.add_subcommand("sweep", "self-sustainability over a (B, lambda) grid");
    SweepArgs sweep;
    std::vector<double> sweep_lambda_min;
    swp->add_option("--blocks,-B", sweep.blocks, "block counts")->required()->delimiter(',');
    auto* sl_s = swp->add_option("--lambda", sweep.lambdas, "arrivals per second")->delimiter(',');
    auto* sl_m = swp->add_option("--lambda-per-min", sweep_lambda_min, "arrivals per minute")->delimiter(',');
    sl_s->excludes(sl_m);
    swp->add_option("--mu", sweep.mu, "block download rate");
    swp->add_option("--gamma", sweep.gamma, "seed departure rate: inf, mu, or a rate");
    swp->add_option("--eta", sweep.eta, "truncation tolerance");
    swp->add_option("--format", sweep.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    swp->add_option("--output,-o", output, "output file (default stdout)");

    // minload
    auto* ml = app.add_subcommand("minload", "smallest load reaching a target self-sustainability");
    int ml_blocks = 0;
    double target = 0.0, ml_eta = 1e-12;
    std::string mode = "exact";
    ml->add_option("--blocks,-B", ml_blocks, "number of blocks")->required();
    ml->add_option("--target", target, "target self-sustainability in (0,1)")->required();
    ml->add_option("--mode", mode, "approx or exact")->check(CLI::IsMember({"approx", "exact"}));
    ml->add_option("--eta", ml_eta, "truncation tolerance (exact mode)");
    ml->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "swarm simulation campaign from a JSON config");
    SimulateArgs sa;
    std::uint64_t seed = 0;
    sim->add_option("config", sa.config, "JSON config with SimConfig field names")->required();
    sim->add_option("--replications,-R", sa.replications, "replications (substreams 1..R)")->check(CLI::PositiveNumber);
    auto* seed_opt = sim->add_option("--seed", seed, "overrides rng_seed from the config");
    sim->add_option("--format", sa.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--trace-prefix", sa.trace_prefix, "write <prefix><i>.trace event traces");
    sim->add_option("--output,-o", output, "output file (default stdout)");

    // validate
    auto* val = app.add_subcommand("validate", "cross-engine consistency checks");
    std::string level = "quick";
    ValidationOptions vopt;
    val->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    val->add_option("--replications,-R", vopt.sim_replications, "swarm replications per point (full)")
        ->check(CLI::PositiveNumber);
    val->add_option("--seed", vopt.seed, "base seed for the stochastic checks");
    val->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kBadInput;
    }

    Sink sink;
    if (!sink.open(output)) {
        std::cerr << "error: " << output << ": cannot open for writing\n";
        return kIo;
    }
    std::ostream& out = *sink.out;
    int rc = kOk;

    if (*sus) {
        if (*lam_m) point.lambda = per_second(lambda_min, true);
        try {
            point.mu.clear();
            std::stringstream ss(mu_text);
            for (std::string item; std::getline(ss, item, ',');) point.mu.push_back(std::stod(item));
        } catch (const std::exception&) {
            std::cerr << "error: --mu must be a number or a comma-separated list of numbers\n";
            return kBadInput;
        }
        rc = cmd_sustain(point, format.empty() ? "text" : format, out, std::cerr);
    } else if (*swp) {
        if (*sl_m)
            for (double l : sweep_lambda_min) sweep.lambdas.push_back(per_second(l, true));
        sweep.jobs = jobs;
        rc = cmd_sweep(sweep, out, std::cerr);
    } else if (*ml) {
        rc = cmd_minload(ml_blocks, target, mode, ml_eta, format.empty() ? "text" : format, out, std::cerr);
    } else if (*sim) {
        if (*seed_opt) sa.seed = seed;
        sa.jobs = jobs;
        rc = cmd_simulate(sa, out, std::cerr);
    } else if (*val) {
        vopt.level = level == "full" ? ValidationLevel::Full : ValidationLevel::Quick;
        vopt.jobs = jobs;
        rc = cmd_validate(vopt, format.empty() ? "text" : format, out, std::cerr);
    }

    out.flush();
    if (!out) {
        std::cerr << "error: " << (output.empty() ? "stdout" : output) << ": write failed\n";
        return kIo;
    }
    return rc;
}
