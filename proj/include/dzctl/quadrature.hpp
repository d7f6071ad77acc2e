#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace dzctl {

/// Gauss-Legendre rule mapped onto [0, 1].
class GaussLegendre {
public:
    explicit GaussLegendre(int order) {
        if (order < 1) throw std::invalid_argument("GaussLegendre: order must be >= 1");
        nodes_.resize(order);
        weights_.resize(order);

        // Newton iteration on P_n from the Chebyshev-like initial guess;
        // roots are symmetric so only half are computed.
        const int half = (order + 1) / 2;
        for (int i = 0; i < half; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= order; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = order * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            // recompute derivative at the converged root
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = order * (z * p0 - p1) / (z * z - 1.0);
            const double w = 2.0 / ((1.0 - z * z) * dp * dp);

            // [-1, 1] -> [0, 1]
            nodes_[i] = 0.5 * (1.0 - z);
            nodes_[order - 1 - i] = 0.5 * (1.0 + z);
            weights_[i] = 0.5 * w;
            weights_[order - 1 - i] = 0.5 * w;
        }
    }

    int order() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    template <class F>
    auto integrate(F&& f) const {
        using Result = std::remove_cvref_t<std::invoke_result_t<F&, double>>;
        Result acc = weights_[0] * f(nodes_[0]);
        for (std::size_t k = 1; k < nodes_.size(); ++k) acc += weights_[k] * f(nodes_[k]);
        return acc;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace dzctl
