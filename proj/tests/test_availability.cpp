#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sustain/availability.hpp"
#include "sustain/closed_form.hpp"
#include "sustain/oracle.hpp"
#include "oracles.hpp"

using namespace sustain;

TEST(AvailDistribution, EmptySystem) {
    const auto d = avail_distribution(ModelParams::homogeneous_params(16, 0.0, 0.15));
    EXPECT_EQ(d.self_sustainability(), 0.0);
    EXPECT_EQ(d.p()[0], 1.0);
}

TEST(AvailDistribution, SingleBlockWithSeeds) {
    for (double rho : {0.2, 1.0, 2.5}) {
        const auto d = avail_distribution(ModelParams::homogeneous_params(1, rho, 1.0, Gamma::equal_mu()), 1e-14);
        EXPECT_NEAR(d.self_sustainability(), -std::expm1(-rho), 1e-13);
    }
}

TEST(AvailDistribution, MatchesEnumeratedMixture) {
    // Independent check: Poisson-mix the enumerated conditional law.
    const int B = 4;
    const double rho = 0.3, mean = B * rho;
    std::vector<long double> ref(B + 1, 0.0L);
    for (int n = 0; n <= 7; ++n) {
        const auto c = oracle::cond_by_enumeration(B, n, B);
        for (int v = 0; v <= B; ++v) ref[v] += oracle::poisson_pmf(mean, n) * c[v];
    }
    const auto d = avail_distribution(ModelParams::homogeneous_params(B, rho, 1.0), 1e-14);
    // Terms n > 7 carry about 1e-4 of mass; compare what both include.
    for (int v = 0; v <= B; ++v) EXPECT_NEAR(d.p()[v], static_cast<double>(ref[v]), 2e-4);
}

TEST(AvailDistribution, LowLoadPaperPoint) {
    const auto d = avail_distribution(ModelParams::homogeneous_params(16, 1.0 / 60, 0.15));
    EXPECT_NEAR(d.self_sustainability(), 0.1, 0.1);
}

TEST(AvailDistribution, TruncationErrorReported) {
    const auto d = avail_distribution(ModelParams::homogeneous_params(16, 0.1, 0.15), 1e-9);
    EXPECT_LE(d.trunc_error(), 1e-9);
    EXPECT_GT(d.truncation(), 0);
    double s = 0.0;
    for (double x : d.p()) s += x;
    EXPECT_NEAR(s, 1.0, 1e-8);
}

TEST(AvailDistribution, GeneralGammaGivesOnlyA) {
    const auto p = ModelParams::homogeneous_params(8, 0.5, 1.0, Gamma::rate(0.3));
    const auto d = avail_distribution(p, 1e-12);
    EXPECT_FALSE(d.has_distribution());
    EXPECT_THROW(d.p(), CapabilityError);
    const double inf = avail_distribution(ModelParams::homogeneous_params(8, 0.5, 1.0), 1e-12).self_sustainability();
    EXPECT_NEAR(d.self_sustainability(), seeded_from_inf(inf, 0.5, 0.3), 1e-15);
}

TEST(AvailDistribution, MonotoneInLoad) {
    double prev = -1.0;
    for (double lam = 0.0; lam <= 0.2; lam += 0.01) {
        const double A = avail_distribution(ModelParams::homogeneous_params(16, lam, 0.15)).self_sustainability();
        EXPECT_GE(A, prev - 1e-12);
        prev = A;
    }
}

TEST(AvailDistribution, GrowsWithFileSizeAtFixedLoad) {
    double prev = -1.0;
    for (int B : {16, 50, 100, 200}) {
        const double A = avail_distribution(ModelParams::homogeneous_params(B, 0.05, 0.15)).self_sustainability();
        EXPECT_GE(A, prev);
        prev = A;
    }
}

namespace {

ModelParams random_het(std::mt19937_64& rng, int B) {
    std::uniform_real_distribution<double> rate(0.2, 3.0);
    ModelParams p;
    p.blocks = B;
    p.lambda = 0.7;
    p.mu.resize(B);
    for (double& m : p.mu) m = rate(rng);
    return p;
}

}  // namespace

TEST(Heterogeneous, FastMatchesDirect) {
    std::mt19937_64 rng(12345);
    const ModelParams p = random_het(rng, 8);
    const auto slow = het_avail(p, 12), fast = het_avail_fast(p, 12);
    for (int v = 0; v <= 8; ++v) EXPECT_NEAR(slow.p()[v], fast.p()[v], 1e-8);
}

TEST(Heterogeneous, EqualRatesReduceToHomogeneous) {
    ModelParams p = ModelParams::homogeneous_params(10, 0.6, 1.0);
    const auto ref = avail_distribution(p, 1e-14);
    p.mu.assign(10, 1.0);
    const auto het = het_avail_fast(p, default_stage_truncation(p, 1e-14));
    for (int v = 0; v <= 10; ++v) EXPECT_NEAR(ref.p()[v], het.p()[v], 1e-8);
}

TEST(Heterogeneous, ZeroLoad) {
    ModelParams p;
    p.blocks = 2;
    p.lambda = 0.0;
    p.mu = {0.5, 2.0};
    for (const auto& d : {het_avail(p, 5), het_avail_fast(p, 5)}) {
        EXPECT_EQ(d.p()[0], 1.0);
        EXPECT_EQ(d.self_sustainability(), 0.0);
    }
}

TEST(Heterogeneous, TwoBlocksAgreeWithMonteCarlo) {
    ModelParams p;
    p.blocks = 2;
    p.lambda = 0.3;
    p.mu = {0.5, 1.5};
    const auto d = avail_distribution(p, 1e-14);
    const auto mc = mc_avail_dist(p, 200000, 99);
    for (int v = 0; v <= 2; ++v) EXPECT_TRUE(mc.covers(v, d.p()[v])) << v;
}

TEST(Heterogeneous, LargeFileStaysFinite) {
    std::mt19937_64 rng(7);
    const ModelParams p = random_het(rng, 400);
    const auto d = het_avail_fast(p, default_stage_truncation(p, 1e-9));
    double s = 0.0;
    for (double x : d.p()) {
        ASSERT_TRUE(std::isfinite(x));
        s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(Heterogeneous, ArgumentChecks) {
    EXPECT_THROW(het_avail(ModelParams::homogeneous_params(4, 1.0, 1.0), 3), ValidationError);
    ModelParams p;
    p.blocks = 3;
    p.lambda = 1.0;
    p.mu = {1.0, 1.0, 1.0};
    p.gamma = Gamma::rate(2.0);
    EXPECT_THROW(avail_distribution(p), CapabilityError);
}
