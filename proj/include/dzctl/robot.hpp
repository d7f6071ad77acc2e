#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "dzctl/layout.hpp"

namespace dzctl::robot {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using State = RobotLayout::State;

/// Planar two-link arm. The joint-2 disturbance term omits g unless
/// `gravity_on_d2` is set.
struct RobotModel {
    double m1 = 6.0;
    double m2 = 3.0;
    double l1 = 0.8;
    double l2 = 0.4;
    double g = 9.81;
    bool gravity_on_d2 = false;

    double coupling() const { return m2 * l1 * l2; }

    void validate() const {
        if (!(m1 > 0 && m2 > 0 && l1 > 0 && l2 > 0 && g > 0))
            throw std::invalid_argument("robot: masses, lengths and g must be positive");
    }
};

struct InertiaDecomposition {
    Mat2 B;
    Mat2 B_d;
    Mat2 Delta_B;
};

inline Vec2 positions(const State& x) { return x.head<2>(); }
inline Vec2 velocities(const State& x) { return x.tail<2>(); }

inline Mat2 inertia_full(const Vec2& q, const RobotModel& r) {
    const double c2 = std::cos(q[1]);
    const double b11 = (r.m1 + r.m2) * r.l1 * r.l1 + r.m2 * r.l2 * r.l2 + 2.0 * r.coupling() * c2;
    const double b12 = r.m2 * r.l2 * r.l2 + r.coupling() * c2;
    const double b22 = r.m2 * r.l2 * r.l2;
    Mat2 B;
    B << b11, b12, b12, b22;
    return B;
}

inline Mat2 inertia_diag(const Vec2& q, const RobotModel& r) {
    Mat2 Bd = Mat2::Zero();
    Bd(0, 0) = 2.0 * r.coupling() * (std::cos(q[1]) + 2.0);
    Bd(1, 1) = r.m2 * r.l2 * r.l2 * (1.0 + 0.5 * std::sin(q[0]));
    return Bd;
}

inline InertiaDecomposition decompose_inertia(const Vec2& q, const RobotModel& r) {
    InertiaDecomposition d{inertia_full(q, r), inertia_diag(q, r), Mat2::Zero()};
    d.Delta_B = d.B - d.B_d;
    return d;
}

/// Delayed Coriolis-type terms. Joint-2 angle comes from the first delay
/// channel, joint rates from the second.
inline Vec2 delayed_nonlinearity(const Vec2& q_delayed, const Vec2& qdot_delayed, const RobotModel& r) {
    const double c = r.coupling();
    const double s2 = std::sin(q_delayed[1]);
    const double w1 = qdot_delayed[0], w2 = qdot_delayed[1];
    return {-c * w1 * w2 * s2 - c * w2 * (w1 + w2) * s2, c * w1 * w1 * s2};
}

inline Vec2 disturbance(const Vec2& q, const RobotModel& r) {
    const double c12 = std::cos(q[0] + q[1]);
    const double d1 = (r.m1 + r.m2) * r.l1 * r.g * std::cos(q[1]) + r.m2 * r.l2 * r.g * c12;
    const double d2 = r.m2 * r.l2 * (r.gravity_on_d2 ? r.g : 1.0) * c12;
    return {d1, d2};
}

/// xdot = [qdot; B(q)^{-1} (F(delayed) + D(q) + u)].
/// `delayed_pos` is x(t - tau_1), `delayed_vel` is x(t - tau_2).
inline State rhs(const State& x, const State& delayed_pos, const State& delayed_vel, const Vec2& u,
                 const RobotModel& r) {
    if (!x.allFinite() || !delayed_pos.allFinite() || !delayed_vel.allFinite() || !u.allFinite())
        throw std::domain_error("robot::rhs: non-finite input");
    const Vec2 q = positions(x);
    const Vec2 torque = delayed_nonlinearity(positions(delayed_pos), velocities(delayed_vel), r) + disturbance(q, r) + u;
    State xdot;
    xdot.head<2>() = velocities(x);
    xdot.tail<2>() = inertia_full(q, r).llt().solve(torque);
    return xdot;
}

/// Linear-in-parameters form of the diagonal inertia: b_dii = W_i * Phi_i(q).
struct Regressor {
    RobotLayout::WeightVec value(int i, const State& x) const {
        RobotLayout::WeightVec phi;
        phi[0] = i == 0 ? std::cos(x[1]) + 2.0 : 1.0 + 0.5 * std::sin(x[0]);
        return phi;
    }

    RobotLayout::Gradient gradient(int i, const State& x) const {
        RobotLayout::Gradient g = RobotLayout::Gradient::Zero();
        if (i == 0) {
            g(0, 1) = -std::sin(x[1]);
        } else {
            g(0, 0) = 0.5 * std::cos(x[0]);
        }
        return g;
    }
};

inline RobotLayout::Weights true_weights(const RobotModel& r) {
    RobotLayout::Weights w;
    w << 2.0 * r.coupling(), r.m2 * r.l2 * r.l2;
    return w;
}

}  // namespace dzctl::robot
