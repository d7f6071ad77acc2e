#include <cmath>

#include <gtest/gtest.h>

#include "dzctl/deadzone.hpp"

using dzctl::DeadZoneChannel;

namespace {

const DeadZoneChannel kChannel1{-0.5, 0.5, 0.5, 1.5, 0.3};
const DeadZoneChannel kChannel2{-2.5, 2.0, 1.5, 2.5, 1.1};

}  // namespace

TEST(DeadZone, OutputExamples) {
    EXPECT_EQ(dzctl::dead_zone_output(0.0, kChannel1), 0.0);
    EXPECT_DOUBLE_EQ(dzctl::dead_zone_output(1.5, kChannel1), 1.5);
    EXPECT_DOUBLE_EQ(dzctl::dead_zone_output(-1.0, kChannel1), -0.25);
}

TEST(DeadZone, DecompositionExamples) {
    auto d = dzctl::decompose(1.5, kChannel1);
    EXPECT_DOUBLE_EQ(d.gain, 1.5);
    EXPECT_DOUBLE_EQ(d.offset, -0.75);
    EXPECT_DOUBLE_EQ(d.reconstruct(1.5), 1.5);

    d = dzctl::decompose(0.2, kChannel1);
    EXPECT_DOUBLE_EQ(d.gain, 2.0);
    EXPECT_DOUBLE_EQ(d.offset, -0.4);
    EXPECT_EQ(d.reconstruct(0.2), 0.0);

    d = dzctl::decompose(0.5, kChannel1);
    EXPECT_EQ(d.reconstruct(0.5), 0.0);
    EXPECT_EQ(dzctl::dead_zone_output(0.5, kChannel1), 0.0);
}

TEST(DeadZone, ResidualBound) {
    EXPECT_DOUBLE_EQ(dzctl::xi_bound(kChannel1), 1.0);
    EXPECT_DOUBLE_EQ(dzctl::xi_bound(kChannel2), 10.0);
    EXPECT_DOUBLE_EQ(dzctl::xi_bound(DeadZoneChannel{-1.0, 1.0, 1.0, 1.0, 1.0}), 2.0);
}

TEST(DeadZone, ValidateChecksAssumptions) {
    EXPECT_NO_THROW(kChannel1.validate());
    EXPECT_NO_THROW(kChannel2.validate());
    EXPECT_THROW((DeadZoneChannel{0.1, 0.5, 1, 1, 0.5}.validate()), std::invalid_argument);
    EXPECT_THROW((DeadZoneChannel{-0.5, 0.5, 0.5, 1.5, 0.6}.validate()), std::invalid_argument);
    EXPECT_THROW((DeadZoneChannel{-0.5, 0.5, 0.0, 1.5, 0.1}.validate()), std::invalid_argument);
}

TEST(DeadZone, GridProperties) {
    constexpr int n = 100000;
    for (const auto& ch : {kChannel1, kChannel2}) {
        double prev = -INFINITY;
        const double p_star = dzctl::xi_bound(ch);
        for (int k = 0; k <= n; ++k) {
            const double v = -10.0 + 20.0 * k / n;
            const double u = dzctl::dead_zone_output(v, ch);
            const auto d = dzctl::decompose(v, ch);
            ASSERT_LE(std::abs(u - d.reconstruct(v)), 1e-12) << v;
            ASSERT_LE(std::abs(d.offset), p_star) << v;
            ASSERT_GE(d.gain, ch.beta0) << v;
            ASSERT_GE(u, prev) << v;  // nondecreasing
            if (v > ch.b_l && v < ch.b_r) {
                ASSERT_EQ(u, 0.0);
            }
            // continuity: a step of 20/n moves u by at most max slope * step
            if (k > 0) {
                ASSERT_LE(u - prev, std::max(ch.k_l, ch.k_r) * 20.0 / n + 1e-12);
            }
            prev = u;
        }
    }
}

TEST(DeadZone, NonlinearBranchSlopeBounds) {
    // g_r slope in [1.4, 1.6], g_l slope in [0.4, 0.6]
    dzctl::BranchDeadZone dz{-0.5, 0.5, [](double v) { return 0.5 * (v + 0.5) + 0.1 * std::sin(v + 0.5); },
                             [](double v) { return 1.5 * (v - 0.5) + 0.1 * std::sin(v - 0.5); }};
    EXPECT_EQ(dz(0.0), 0.0);
    EXPECT_EQ(dz(0.5), 0.0);
    for (int k = 1; k <= 1000; ++k) {
        const double d = 0.01 * k;
        const double right = dz.secant_slope(0.5 + d);
        const double left = dz.secant_slope(-0.5 - d);
        EXPECT_GE(right, 1.4);
        EXPECT_LE(right, 1.6);
        EXPECT_GE(left, 0.4);
        EXPECT_LE(left, 0.6);
        EXPECT_NEAR(right * d, dz(0.5 + d), 1e-12);
    }
    EXPECT_THROW((void)dz.secant_slope(0.1), std::domain_error);
}
