#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>

namespace dzctl {

/// Dead-zone with linear branches: u = k_r (v - b_r) for v >= b_r,
/// u = k_l (v - b_l) for v <= b_l, zero in between.
struct DeadZoneChannel {
    double b_l = -1.0;
    double b_r = 1.0;
    double k_l = 1.0;
    double k_r = 1.0;
    double beta0 = 1.0;  ///< declared lower bound on both slopes

    void validate() const {
        if (!(b_l < 0.0 && b_r > 0.0)) throw std::invalid_argument("dead-zone: need b_l < 0 < b_r");
        if (!(k_l > 0.0 && k_r > 0.0)) throw std::invalid_argument("dead-zone: slopes must be positive");
        if (!(beta0 > 0.0 && beta0 <= std::min(k_l, k_r)))
            throw std::invalid_argument("dead-zone: need 0 < beta0 <= min(k_l, k_r), got beta0=" +
                                        std::to_string(beta0));
    }
};

/// u = gain * v + offset.
struct DeadZoneDecomposition {
    double gain = 0.0;
    double offset = 0.0;

    double reconstruct(double v) const { return gain * v + offset; }
};

inline double dead_zone_output(double v, const DeadZoneChannel& ch) {
    if (v >= ch.b_r) return ch.k_r * (v - ch.b_r);
    if (v <= ch.b_l) return ch.k_l * (v - ch.b_l);
    return 0.0;
}

/// Indicator/slope form of the dead-zone. The right indicator is active for
/// v > b_l and the left one for v < b_r, so inside the band both slopes add
/// and the offset cancels the linear part exactly.
inline DeadZoneDecomposition decompose(double v, const DeadZoneChannel& ch) {
    const double phi_r = v > ch.b_l ? 1.0 : 0.0;
    const double phi_l = v < ch.b_r ? 1.0 : 0.0;
    DeadZoneDecomposition d;
    d.gain = ch.k_r * phi_r + ch.k_l * phi_l;
    if (v >= ch.b_r) {
        d.offset = -ch.k_r * ch.b_r;
    } else if (v <= ch.b_l) {
        d.offset = -ch.k_l * ch.b_l;
    } else {
        d.offset = -(ch.k_l + ch.k_r) * v;
    }
    return d;
}

/// Bound p* on |offset|.
inline double xi_bound(const DeadZoneChannel& ch) {
    return (ch.k_r + ch.k_l) * std::max(ch.b_r, -ch.b_l);
}

/// Dead-zone with arbitrary smooth branches g_l, g_r (g_l(b_l) = g_r(b_r) = 0).
template <class Left, class Right>
    requires std::invocable<const Left&, double> && std::invocable<const Right&, double>
struct BranchDeadZone {
    double b_l;
    double b_r;
    Left g_l;
    Right g_r;

    double operator()(double v) const {
        if (v >= b_r) return g_r(v);
        if (v <= b_l) return g_l(v);
        return 0.0;
    }

    /// Mean-value slope (g(v) - g(b)) / (v - b) outside the band; only
    /// defined there.
    double secant_slope(double v) const {
        if (v > b_r) return g_r(v) / (v - b_r);
        if (v < b_l) return g_l(v) / (v - b_l);
        throw std::domain_error("BranchDeadZone::secant_slope: v inside the dead band");
    }
};

template <class Left, class Right>
BranchDeadZone(double, double, Left, Right) -> BranchDeadZone<Left, Right>;

}  // namespace dzctl
