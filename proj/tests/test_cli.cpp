#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"

using namespace sustain;
using namespace sustain::cli;

namespace {

struct Outcome {
    int rc;
    std::string out, err;
};

template <typename F>
Outcome capture(F&& f) {
    std::ostringstream out, err;
    const int rc = f(out, err);
    return {rc, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
    const std::string path = testing::TempDir() + name;
    std::ofstream(path) << body;
    return path;
}

}  // namespace

TEST(CliSustain, SingleBlockWithSeeds) {
    const json r = sustain_report({1, 0.15, {0.15}, "mu", 1e-14});
    EXPECT_NEAR(r["A"].get<double>(), 1 - std::exp(-1.0), 1e-13);
    EXPECT_NEAR(r["A_closed_form"].get<double>(), 1 - std::exp(-1.0), 1e-15);
    EXPECT_LE(r["bounds"]["lower"].get<double>(), r["A"].get<double>() + 1e-13);
}

TEST(CliSustain, ZeroLoad) {
    EXPECT_EQ(sustain_report({16, 0.0, {0.15}, "inf", 1e-9})["A"].get<double>(), 0.0);
}

TEST(CliSustain, HighLoadPaperPoint) {
    EXPECT_GE(sustain_report({16, 8.0 / 60, {0.15}, "inf", 1e-9})["A"].get<double>(), 0.9);
}

TEST(CliSustain, NumbersComeStraightFromTheLibrary) {
    const auto p = ModelParams::homogeneous_params(20, 0.07, 0.15, Gamma::equal_mu());
    const auto d = avail_distribution(p, 1e-9);
    const json r = sustain_report({20, 0.07, {0.15}, "mu", 1e-9});
    EXPECT_EQ(r["A"].get<double>(), d.self_sustainability());
    EXPECT_EQ(r["E_V"].get<double>(), d.mean());
    EXPECT_EQ(r["A_closed_form"].get<double>(), self_sust_closed_seeded(20, 0.07 / 0.15));
}

TEST(CliSustain, ExitCodes) {
    EXPECT_EQ(capture([](auto& o, auto& e) { return cmd_sustain({0, 1.0, {1.0}, "inf", 1e-9}, "text", o, e); }).rc, 2);
    EXPECT_EQ(capture([](auto& o, auto& e) { return cmd_sustain({4, 1.0, {1.0}, "sometimes", 1e-9}, "text", o, e); }).rc, 2);
    // per-block rates with lingering seeds are outside the model
    EXPECT_EQ(capture([](auto& o, auto& e) {
                  return cmd_sustain({2, 1.0, {1.0, 2.0}, "0.5", 1e-9}, "text", o, e);
              }).rc,
              3);
}

TEST(CliGamma, Parsing) {
    EXPECT_TRUE(parse_gamma("inf").is_infinite());
    EXPECT_EQ(parse_gamma("mu").kind(), Gamma::Kind::EqualMu);
    EXPECT_EQ(parse_gamma("0.25").value(), 0.25);
    EXPECT_THROW(parse_gamma("-1"), ValidationError);
    EXPECT_THROW(parse_gamma("0.2x"), ValidationError);
}

TEST(CliSweep, CsvHeaderAndOrder) {
    SweepArgs a;
    a.blocks = {16, 50};
    a.lambdas = {1.0 / 60, 4.0 / 60};
    a.mu = 0.15;
    const Outcome r = capture([&](auto& o, auto& e) { return cmd_sweep(a, o, e); });
    EXPECT_EQ(r.rc, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "B,lambda_per_s,mu,gamma,rho,N,A,trunc_error");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].substr(0, 3), "16,");
    EXPECT_EQ(rows[2].substr(0, 3), "50,");
}

TEST(CliSweep, SingleCellEqualsSustain) {
    SweepArgs a;
    a.blocks = {16};
    a.lambdas = {0.05};
    a.mu = 0.15;
    a.gamma = "mu";
    const auto rows = sweep_rows(a);
    const json r = sustain_report({16, 0.05, {0.15}, "mu", a.eta});
    EXPECT_EQ(rows.at(0).A, r["A"].get<double>());
    EXPECT_EQ(rows.at(0).N, r["N"].get<long>());
    EXPECT_EQ(rows.at(0).trunc_error, r["trunc_error"].get<double>());
}

TEST(CliSweep, MonotoneAlongLambdaAndParallelSafe) {
    SweepArgs a;
    a.blocks = {16, 50, 100, 200};
    for (int i = 0; i <= 12; ++i) a.lambdas.push_back(i / 60.0);
    a.mu = 0.15;
    const auto serial = sweep_rows(a);
    a.jobs = 4;
    const auto parallel = sweep_rows(a);
    for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i].A, parallel[i].A);
    // A is exact up to the reported truncation mass
    auto at_least = [&](std::size_t hi, std::size_t lo) {
        EXPECT_GE(serial[hi].A, serial[lo].A - serial[lo].trunc_error - serial[hi].trunc_error - 1e-12) << hi << ' ' << lo;
    };
    const std::size_t L = a.lambdas.size();
    for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t i = 1; i < L; ++i) at_least(b * L + i, b * L + i - 1);
    // fixed load: larger files are more self-sustaining
    for (std::size_t i = 1; i < L; ++i)
        for (std::size_t b = 1; b < 4; ++b) at_least(b * L + i, (b - 1) * L + i);
}

TEST(CliSweep, FailedCellsEmitNanAndContinue) {
    SweepArgs a;
    a.blocks = {8};
    a.lambdas = {-1.0, 0.2};
    const Outcome r = capture([&](auto& o, auto& e) { return cmd_sweep(a, o, e); });
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.out.find(",nan,"), std::string::npos);
    EXPECT_NE(r.err.find("1 of 2 cells failed"), std::string::npos);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

TEST(CliSweep, JsonMirrorsCsv) {
    SweepArgs a;
    a.blocks = {16};
    a.lambdas = {0.1};
    a.format = "json";
    const Outcome r = capture([&](auto& o, auto& e) { return cmd_sweep(a, o, e); });
    const json arr = json::parse(r.out);
    ASSERT_EQ(arr.size(), 1u);
    std::vector<std::string> keys;
    for (const auto& [k, v] : arr[0].items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"B", "lambda_per_s", "mu", "gamma", "rho", "N", "A", "trunc_error"}));
}

TEST(CliMinload, Values) {
    const Outcome approx = capture([](auto& o, auto& e) { return cmd_minload(16, 0.9, "approx", 1e-12, "json", o, e); });
    EXPECT_NEAR(json::parse(approx.out)["rho"].get<double>(), 0.676689842, 1e-9);
    const Outcome exact = capture([](auto& o, auto& e) { return cmd_minload(10, 0.999, "exact", 1e-12, "json", o, e); });
    EXPECT_NEAR(json::parse(exact.out)["coverage"].get<double>() / 20.0, 1.0, 0.15);
    EXPECT_EQ(capture([](auto& o, auto& e) { return cmd_minload(10, 1.2, "exact", 1e-12, "text", o, e); }).rc, 2);
}

TEST(CliSimulate, ConfigKeysAreExact) {
    EXPECT_THROW(parse_sim_config(json::parse(R"({"B": 16, "lamda": 0.1})")), ValidationError);
    EXPECT_THROW(parse_sim_config(json::parse(R"({"B": "16"})")), ValidationError);
    EXPECT_THROW(parse_sim_config(json::parse(R"([1, 2])")), ValidationError);
    const SimConfig c = parse_sim_config(json::parse(R"({"B": 8, "seed_linger_rate": "inf", "peer_download_Bps": 1000})"));
    EXPECT_EQ(c.B, 8);
    EXPECT_TRUE(std::isinf(c.seed_linger_rate));
    EXPECT_EQ(c.download_rate(), 1000.0);
}

TEST(CliSimulate, ShippedConfigsParse) {
    for (const char* f : {"swarm_b16_4pm.json", "swarm_quiet.json", "swarm_lingering_seeds.json"})
        EXPECT_NO_THROW(load_sim_config(std::string(SUSTAIN_CONFIG_DIR) + "/" + f)) << f;
}

TEST(CliSimulate, DeterministicOutput) {
    const std::string cfg = temp_file("sim.json", R"({"B": 16, "lambda": 0.0666666667, "horizon_seconds": 2000})");
    SimulateArgs a;
    a.config = cfg;
    a.replications = 2;
    a.seed = 5;
    const Outcome first = capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); });
    a.jobs = 2;
    const Outcome second = capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); });
    EXPECT_EQ(first.rc, 0);
    EXPECT_EQ(first.out, second.out);
    EXPECT_NE(first.out.find("\npooled,"), std::string::npos);
    a.format = "json";
    const Outcome js = capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); });
    EXPECT_EQ(json::parse(js.out).size(), 3u);
}

TEST(CliSimulate, ZeroArrivalsGiveZeroMetrics) {
    const std::string cfg = temp_file("quiet.json", R"({"B": 8, "lambda": 0, "horizon_seconds": 500})");
    SimulateArgs a;
    a.config = cfg;
    a.replications = 1;
    a.format = "json";
    const Outcome r = capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); });
    const json pooled = json::parse(r.out).back();
    EXPECT_EQ(pooled["self_sustainability"].get<double>(), 0.0);
    EXPECT_EQ(pooled["mean_peers"].get<double>(), 0.0);
    for (double x : pooled["replica_mean_peers_only"]) EXPECT_EQ(x, 0.0);
}

TEST(CliSimulate, ExitCodes) {
    SimulateArgs a;
    a.config = "/nonexistent/config.json";
    EXPECT_EQ(capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); }).rc, 2);
    a.config = temp_file("typo.json", R"({"horizon": 10})");
    EXPECT_EQ(capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); }).rc, 2);
    a.config = temp_file("garbage.json", "{not json");
    EXPECT_EQ(capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); }).rc, 2);
    a.config = temp_file("ok.json", R"({"lambda": 0.01, "horizon_seconds": 300})");
    a.replications = 1;
    a.trace_prefix = "/nonexistent-dir/run";
    EXPECT_EQ(capture([&](auto& o, auto& e) { return cmd_simulate(a, o, e); }).rc, 4);
}

TEST(CliNumbers, RoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, 6.02e23, 1e-300, 0.0})
        EXPECT_EQ(std::strtod(num(x).c_str(), nullptr), x);
    EXPECT_EQ(num(NAN), "nan");
    EXPECT_EQ(num(0.5), "0.5");
}
