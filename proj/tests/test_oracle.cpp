#include <cmath>

#include <gtest/gtest.h>

#include "sustain/availability.hpp"
#include "sustain/cond_avail.hpp"
#include "sustain/oracle.hpp"
#include "sustain/psi.hpp"

using namespace sustain;

namespace {

StageVector stages(std::vector<int> n) { return StageVector{std::move(n)}; }

}  // namespace

TEST(InclusionExclusion, HandValues) {
    EXPECT_NEAR(exact_all_available(2, stages({0, 2, 0})), 0.5, 1e-15);
    EXPECT_NEAR(exact_all_available(2, stages({0, 1, 0})), 0.0, 1e-15);
    EXPECT_NEAR(exact_all_available(3, stages({0, 0, 0, 0})), 0.0, 1e-15);
    EXPECT_NEAR(exact_all_available(3, stages({4, 0, 0, 0})), 0.0, 1e-15);
    EXPECT_NEAR(exact_all_available(3, stages({0, 0, 0, 1})), 1.0, 1e-15);
}

TEST(Enumeration, HandValues) {
    const auto two = enumerate_cond_dist(2, stages({0, 2, 0}));
    EXPECT_NEAR(two[0], 0.0, 1e-15);
    EXPECT_NEAR(two[1], 0.5, 1e-15);
    EXPECT_NEAR(two[2], 0.5, 1e-15);
    const auto one = enumerate_cond_dist(3, stages({0, 1, 0, 0}));
    EXPECT_EQ(one[1], 1.0);
    const auto mixed = enumerate_cond_dist(3, stages({0, 1, 1, 0}));
    for (int v = 0; v <= 3; ++v) EXPECT_NEAR(mixed[v], psi_direct(3, 2, 1, v), 1e-15);
}

TEST(Oracles, AgreeWithStageMixing) {
    for (int B = 1; B <= 4; ++B) {
        std::vector<int> n(B + 1, 0);
        // every stage vector with at most 4 users
        std::function<void(int, int)> rec = [&](int h, int left) {
            if (h > B) {
                const auto analytic = cond_dist_given_stages(B, n);
                const auto counted = enumerate_cond_dist(B, stages(n));
                for (int v = 0; v <= B; ++v) ASSERT_NEAR(analytic[v], counted[v], 1e-12);
                ASSERT_NEAR(exact_all_available(B, stages(n)), analytic[B], 1e-12);
                return;
            }
            for (int c = 0; c <= left; ++c) {
                n[h] = c;
                rec(h + 1, left - c);
            }
            n[h] = 0;
        };
        rec(0, 4);
    }
}

TEST(Oracles, CapabilityLimits) {
    EXPECT_THROW(exact_all_available(31, stages(std::vector<int>(32, 0))), CapabilityError);
    std::vector<int> big(13, 0);
    big[6] = 5;
    EXPECT_THROW(enumerate_cond_dist(12, stages(big)), CapabilityError);
}

TEST(MonteCarlo, EmptySystem) {
    const auto mc = mc_avail_dist(ModelParams::homogeneous_params(8, 0.0, 1.0), 1000, 1);
    EXPECT_EQ(mc.p[0], 1.0);
    EXPECT_EQ(mc.half_width[0], 0.0);
}

TEST(MonteCarlo, CoversAnalytic) {
    const auto p = ModelParams::homogeneous_params(8, 0.5, 1.0);
    const double A = avail_distribution(p, 1e-14).self_sustainability();
    EXPECT_TRUE(mc_avail_dist(p, 100000, 3).covers(8, A));
}

TEST(MonteCarlo, SeededCoversAnalytic) {
    const auto p = ModelParams::homogeneous_params(6, 0.4, 1.0, Gamma::equal_mu());
    const auto d = avail_distribution(p, 1e-14);
    const auto mc = mc_avail_dist(p, 100000, 4);
    for (int v = 0; v <= 6; ++v) EXPECT_TRUE(mc.covers(v, d.p()[v])) << v;
}

TEST(MonteCarlo, Deterministic) {
    const auto p = ModelParams::homogeneous_params(8, 0.5, 1.0);
    EXPECT_EQ(mc_avail_dist(p, 5000, 11).p, mc_avail_dist(p, 5000, 11).p);
}

TEST(Ctmc, EmptySystem) {
    const auto m = ctmc_simulate(ModelParams::homogeneous_params(8, 0.0, 1.0), 1000.0, 1);
    EXPECT_EQ(m.self_sustainability, 0.0);
    EXPECT_EQ(m.mean_users, 0.0);
}

TEST(Ctmc, StageMeansAndAvailability) {
    const double rho = 1.0;
    const auto p = ModelParams::homogeneous_params(8, rho, 1.0);
    const double A = avail_distribution(p, 1e-14).self_sustainability();
    std::vector<double> runs, stage_avg;
    std::vector<std::vector<double>> stage_runs(8);
    for (int r = 0; r < 10; ++r) {
        const auto m = ctmc_simulate(p, 5e4, 100 + r);
        runs.push_back(m.self_sustainability);
        for (int h = 0; h < 8; ++h) stage_runs[h].push_back(m.stage_means[h]);
    }
    auto mean_se = [](const std::vector<double>& xs) {
        double m = 0.0, s = 0.0;
        for (double x : xs) m += x / xs.size();
        for (double x : xs) s += (x - m) * (x - m);
        return std::pair{m, std::sqrt(s / (xs.size() - 1) / xs.size())};
    };
    const auto [a, se] = mean_se(runs);
    EXPECT_LE(std::abs(a - A), 3 * se);
    for (int h = 0; h < 8; ++h) {
        const auto [m, s] = mean_se(stage_runs[h]);
        EXPECT_LE(std::abs(m - rho), 3 * s + 1e-3) << h;
    }
}

TEST(Ctmc, Deterministic) {
    const auto p = ModelParams::homogeneous_params(5, 0.5, 1.0);
    EXPECT_EQ(ctmc_simulate(p, 2000.0, 9).self_sustainability, ctmc_simulate(p, 2000.0, 9).self_sustainability);
}

TEST(Ctmc, RejectsUnsupportedModels) {
    EXPECT_THROW(ctmc_simulate(ModelParams::homogeneous_params(4, 1.0, 1.0, Gamma::equal_mu()), 10.0, 1), CapabilityError);
}
