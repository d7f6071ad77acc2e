#pragma once

#include <Eigen/Dense>

namespace dzctl {

/// Shape of a chain-structured MIMO plant: `Order` blocks of `Channels`
/// coordinates each (x = [x_1; ...; x_n], x_i in R^m), with `Params`
/// adaptive weights per channel.
template <int Order, int Channels, int Params = 1>
struct Layout {
    static_assert(Order >= 1 && Channels >= 1 && Params >= 1);

    static constexpr int n = Order;
    static constexpr int m = Channels;
    static constexpr int l = Params;
    static constexpr int dim = Order * Channels;

    using State = Eigen::Matrix<double, dim, 1>;
    using Channel = Eigen::Matrix<double, m, 1>;
    using Block = Eigen::Matrix<double, m, 1>;
    using Weights = Eigen::Matrix<double, m, l>;
    using WeightVec = Eigen::Matrix<double, l, 1>;
    using Gradient = Eigen::Matrix<double, l, dim>;

    /// Column j holds the j-th time derivative of the per-channel error.
    using ErrorStack = Eigen::Matrix<double, m, n>;
    /// Column j holds the j-th derivative of the reference, j = 0..n.
    using ReferenceStack = Eigen::Matrix<double, m, n + 1>;
    /// Filter coefficients lambda_{i,1..n-1}, one row per channel.
    using FilterCoeffs = Eigen::Matrix<double, m, (n > 1 ? n - 1 : 1)>;

    static constexpr int index(int block, int channel) { return block * m + channel; }
};

/// The 2-DOF manipulator: positions and velocities of two joints.
using RobotLayout = Layout<2, 2, 1>;

}  // namespace dzctl
