#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "sustain/validation.hpp"

using namespace sustain;

namespace {

// The fast recursion with its (B+1) factor replaced by B.
CondAvailTable mutated_fast(int B, int N) {
    CondAvailTable t(B, N, GammaMode::Infinite);
    double base = 1.0;
    for (int n = 1; n <= N; ++n) {
        base /= B;
        t(n, 0) = base;
        double partial = base;
        for (int v = 1; v < B; ++v) {
            t(n, v) = t(n, v - 1) + t(n - 1, v) * static_cast<double>(B) / (static_cast<double>(B) * (B - v + 1));
            partial += t(n, v);
        }
        t(n, B) = std::max(0.0, 1.0 - partial);
    }
    return t;
}

}  // namespace

TEST(Validation, QuickLevelPassesOnCorrectBuild) {
    std::ostringstream out, err;
    const int rc = cli::cmd_validate({}, "text", out, err);
    std::cout << out.str();
    EXPECT_EQ(rc, 0);
    EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
    EXPECT_NE(out.str().find("PASS recursion-vs-lemma"), std::string::npos);
}

TEST(Validation, CorruptedCoefficientIsCaught) {
    Engines broken;
    broken.fast = mutated_fast;
    const CheckResult r = check_recursion_vs_lemma(broken);
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.deviation, 1e-3);
    const CheckResult closed = check_closed_conditional(broken);
    EXPECT_FALSE(closed.pass);
    // the untouched engines still agree
    EXPECT_TRUE(check_recursion_vs_lemma().pass);
}

TEST(Validation, ExceptionsBecomeFailures) {
    Engines broken;
    broken.seeded = [](int, int) -> CondAvailTable { throw std::runtime_error("boom"); };
    const CheckResult r = check_closed_self_sustainability(broken);
    EXPECT_FALSE(r.pass);
    EXPECT_NE(r.detail.find("boom"), std::string::npos);
}

TEST(Validation, SwarmPointReportsDeviation) {
    const SwarmPoint pt = run_swarm_point(4.0, 2, 3000.0, 1, 2);
    ASSERT_EQ(pt.runs.size(), 2u);
    const CheckResult r = check_swarm_point(pt);
    EXPECT_EQ(r.name, "swarm-vs-model-lambda4");
    EXPECT_NEAR(r.deviation, std::abs(pt.sim_A - pt.model_A), 1e-15);
}
