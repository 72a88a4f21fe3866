#include <cstdio>

#include <gtest/gtest.h>

#include "sustain/psi.hpp"
#include "oracles.hpp"

using namespace sustain;

TEST(PsiDirect, HandValues) {
    EXPECT_DOUBLE_EQ(psi_direct(2, 1, 0, 1), 1.0);
    EXPECT_NEAR(psi_direct(3, 2, 1, 2), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(psi_direct(3, 2, 1, 3), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(psi_direct(3, 2, 1, 1), 0.0);  // outside the support
}

TEST(PsiDirect, MatchesExactBinomials) {
    for (int B : {5, 17, 40})
        for (int h = 0; h <= B; ++h)
            for (int k = 0; k <= B; ++k)
                for (int v = k; v <= B; ++v)
                    EXPECT_NEAR(psi_direct(B, h, k, v), static_cast<double>(oracle::psi(B, h, k, v)), 1e-13)
                        << B << ' ' << h << ' ' << k << ' ' << v;
}

TEST(PsiDirect, LargeBlockCountStaysFinite) {
    const double x = psi_direct(10000, 5000, 5000, 7500);
    EXPECT_TRUE(std::isfinite(x));
    EXPECT_GT(x, 0.0);
}

TEST(PsiRecursive, BaseCase) {
    const PsiKernel psi = psi_recursive(6, 6);
    for (int k = 0; k <= 6; ++k)
        for (int v = 0; v <= 6; ++v) EXPECT_EQ(psi(0, k, v), v == k ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(psi_recursive(2, 1)(1, 0, 1), 1.0);
    EXPECT_NEAR(psi_recursive(3, 2)(2, 1, 2), 2.0 / 3.0, 1e-15);
}

TEST(PsiRecursive, MatchesDirectFormula) {
    for (int B : {1, 2, 7, 33, 100}) {
        const PsiKernel psi = psi_recursive(B, B);
        for (int h = 0; h <= B; ++h)
            for (int k = 0; k <= B; ++k)
                for (int v = 0; v <= B; ++v) ASSERT_NEAR(psi(h, k, v), psi_direct(B, h, k, v), 1e-12);
    }
}

// The coefficients as printed, (B-v-h)/(B-h+1) for a fresh block and
// v/(B-h+1) for a repeat, break the base case. Report by how much.
TEST(PsiRecursive, AsPrintedCoefficientsDisagree) {
    const int B = 6;
    std::vector<std::vector<std::vector<double>>> p(B + 1, std::vector<std::vector<double>>(B + 1, std::vector<double>(B + 1, 0.0)));
    for (int k = 0; k <= B; ++k) p[0][k][k] = 1.0;
    double worst = 0.0;
    for (int h = 1; h <= B; ++h)
        for (int k = 0; k <= B; ++k)
            for (int v = 0; v <= B; ++v) {
                const double fresh = v > 0 ? p[h - 1][k][v - 1] * (B - v - h) / (B - h + 1.0) : 0.0;
                p[h][k][v] = fresh + p[h - 1][k][v] * v / (B - h + 1.0);
                worst = std::max(worst, std::abs(p[h][k][v] - psi_direct(B, h, k, v)));
            }
    std::printf("as-printed recursion: psi_1(0,1) = %.6f (should be 1), max deviation %.4f at B=%d\n",
                p[1][0][1], worst, B);
    EXPECT_GT(worst, 0.1);
}

TEST(PsiTailSum, HandValues) {
    EXPECT_NEAR(psi_tail_sum(3, 1, 2), 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(psi_tail_sum(3, 1, 3), 1.0 / 3.0, 1e-14);
    for (int B : {1, 5, 20}) EXPECT_NEAR(psi_tail_sum(B, 0, 0), 1.0, 1e-14);
}

TEST(PsiTailSum, IdentityHolds) {
    for (int B : {1, 2, 9, 64, 256})
        for (int k = 0; k <= B; ++k)
            for (int v = k; v <= B; ++v) ASSERT_NEAR(psi_tail_sum(B, k, v), psi_tail_sum_identity(B, k, v), 1e-10);
}

TEST(PsiKernel, RowsSumToOne) {
    const int B = 40;
    const PsiKernel psi = psi_recursive(B, B);
    for (int h = 0; h <= B; ++h)
        for (int k = 0; k <= B; ++k) {
            double s = 0.0;
            for (double x : psi.row(h, k)) s += x;
            ASSERT_NEAR(s, 1.0, 1e-12);
        }
}

TEST(PsiArgs, Rejected) {
    EXPECT_THROW(psi_direct(3, 4, 0, 0), ValidationError);
    EXPECT_THROW(psi_direct(3, 1, -1, 0), ValidationError);
    EXPECT_THROW(psi_tail_sum(3, 2, 1), ValidationError);
}
