#include <cmath>

#include <gtest/gtest.h>

#include "dzctl/quadrature.hpp"

using dzctl::GaussLegendre;

TEST(GaussLegendre, RejectsNonPositiveOrder) { EXPECT_THROW(GaussLegendre(0), std::invalid_argument); }

TEST(GaussLegendre, TwoPointNodesAreKnown) {
    const GaussLegendre q(2);
    EXPECT_NEAR(q.nodes()[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.nodes()[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.weights()[0], 0.5, 1e-15);
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
    for (int order : {1, 3, 8, 16}) {
        const GaussLegendre q(order);
        double wsum = 0.0;
        for (double w : q.weights()) wsum += w;
        EXPECT_NEAR(wsum, 1.0, 1e-14) << order;
        for (int k = 0; k <= 2 * order - 1; ++k) {
            const double got = q.integrate([k](double t) { return std::pow(t, k); });
            EXPECT_NEAR(got, 1.0 / (k + 1), 1e-14) << "order " << order << " degree " << k;
        }
    }
}

TEST(GaussLegendre, SmoothIntegrandConverges) {
    const GaussLegendre q(16);
    EXPECT_NEAR(q.integrate([](double t) { return std::exp(t); }), std::exp(1.0) - 1.0, 1e-14);
}
