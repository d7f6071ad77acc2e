#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dzctl/layout.hpp"
#include "dzctl/quadrature.hpp"

namespace dzctl {

/// True when r^d + c_1 r^{d-1} + ... + c_d has all roots in the open left half-plane.
inline bool is_hurwitz(const std::vector<double>& coeffs) {
    const int d = static_cast<int>(coeffs.size());
    if (d == 0) return true;
    for (double c : coeffs)
        if (!std::isfinite(c)) return false;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) companion(0, j) = -coeffs[j];
    for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    const Eigen::VectorXcd roots = companion.eigenvalues();
    for (int i = 0; i < d; ++i)
        if (!(roots[i].real() < 0.0)) return false;
    return true;
}

template <class L>
struct ControllerParams {
    using Channel = typename L::Channel;

    typename L::FilterCoeffs lambda = L::FilterCoeffs::Ones();
    Channel K1 = Channel::Ones();
    Channel alpha = Channel::Ones();
    Channel beta0 = Channel::Ones();
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    typename L::Weights Omega = L::Weights::Ones();
    double eps_s = 0.2;
    double eps_rho = 0.1;
    double tau_bar_max = 0.0;

    /// Spectral norm of diag(beta0)^{-1}.
    double beta0_inv_norm() const { return beta0.cwiseInverse().maxCoeff(); }

    std::vector<double> filter_polynomial(int channel) const {
        std::vector<double> c;
        for (int j = 0; j < L::n - 1; ++j) c.push_back(lambda(channel, j));
        return c;
    }

    void validate() const {
        auto positive = [](const auto& v) { return v.allFinite() && (v.array() > 0.0).all(); };
        if (!positive(K1)) throw std::invalid_argument("controller: K1 must be positive");
        if (!positive(alpha)) throw std::invalid_argument("controller: alpha must be positive");
        if (!positive(beta0)) throw std::invalid_argument("controller: beta0 must be positive");
        if (!positive(Omega)) throw std::invalid_argument("controller: Omega must be positive");
        if (!(gamma1 >= 0.0 && gamma2 >= 0.0)) throw std::invalid_argument("controller: gamma1, gamma2 must be >= 0");
        if (!(eps_s > 0.0)) throw std::invalid_argument("controller: eps_s must be positive");
        if (!(eps_rho > 0.0)) throw std::invalid_argument("controller: eps_rho must be positive");
        if (!(tau_bar_max >= 0.0 && tau_bar_max < 1.0))
            throw std::invalid_argument("controller: tau_bar_max must lie in [0, 1)");
        if (!(gamma2 * beta0_inv_norm() < 1.0))
            throw std::invalid_argument("controller: infeasible robust gain, need gamma2 < 1/||beta0^-1|| = " +
                                        std::to_string(1.0 / beta0_inv_norm()));
        for (int i = 0; i < L::m; ++i)
            if (!is_hurwitz(filter_polynomial(i)))
                throw std::invalid_argument("controller: filter polynomial of channel " + std::to_string(i + 1) +
                                            " is not Hurwitz");
    }
};

/// Known bound functions rho_ik(x_k): row i is the output channel, column k
/// the delayed state block x_k.
template <class L>
class BoundFunctions {
public:
    using Fn = std::function<double(const typename L::Block&)>;

    BoundFunctions() = default;
    BoundFunctions(int blocks, Fn fill) : blocks_(blocks), table_(static_cast<std::size_t>(L::m * blocks), fill) {
        if (blocks < 0 || blocks > L::n) throw std::invalid_argument("BoundFunctions: bad block count");
    }

    int blocks() const { return blocks_; }
    Fn& at(int i, int k) { return table_.at(static_cast<std::size_t>(i * blocks_ + k)); }
    const Fn& at(int i, int k) const { return table_.at(static_cast<std::size_t>(i * blocks_ + k)); }

    double operator()(int i, int k, const typename L::Block& xk) const { return at(i, k)(xk); }

    /// sum_k rho_ik(x_k)^2 with every block taken from the same state.
    double sum_squares(int i, const typename L::State& x) const {
        double acc = 0.0;
        for (int k = 0; k < blocks_; ++k) {
            const typename L::Block xk = x.template segment<L::m>(k * L::m);
            const double r = at(i, k)(xk);
            acc += r * r;
        }
        return acc;
    }

private:
    int blocks_ = 0;
    std::vector<Fn> table_;
};

/// Per-channel error derivatives e^{(j)} = x_{j+1} - y_d^{(j)}, j = 0..n-1.
template <class L>
typename L::ErrorStack error_stack(const typename L::State& x, const typename L::ReferenceStack& yd) {
    typename L::ErrorStack e;
    for (int j = 0; j < L::n; ++j) e.col(j) = x.template segment<L::m>(j * L::m) - yd.col(j);
    return e;
}

/// s_i = e^{(n-1)} + lambda_1 e^{(n-2)} + ... + lambda_{n-1} e.
template <class L>
typename L::Channel filtered_error(const typename L::ErrorStack& e, const typename L::FilterCoeffs& lambda) {
    typename L::Channel s = e.col(L::n - 1);
    for (int j = 1; j < L::n; ++j) s += lambda.col(j - 1).cwiseProduct(e.col(L::n - 1 - j));
    return s;
}

/// nu_i = -y_d^{(n)} + sum_j lambda_j e^{(n-j)}.
template <class L>
typename L::Channel nu(const typename L::ErrorStack& e, const typename L::ReferenceStack& yd,
                       const typename L::FilterCoeffs& lambda) {
    typename L::Channel v = -yd.col(L::n);
    for (int j = 1; j < L::n; ++j) v += lambda.col(j - 1).cwiseProduct(e.col(L::n - j));
    return v;
}

/// zeta_i = y_d^{(n-1)} - sum_j lambda_j e^{(n-1-j)}, so that s = x_n - zeta.
template <class L>
typename L::Channel zeta(const typename L::ReferenceStack& yd, const typename L::ErrorStack& e,
                         const typename L::FilterCoeffs& lambda) {
    typename L::Channel z = yd.col(L::n - 1);
    for (int j = 1; j < L::n; ++j) z -= lambda.col(j - 1).cwiseProduct(e.col(L::n - 1 - j));
    return z;
}

/// x with its last-block coordinate i replaced by theta * s_i + zeta_i.
template <class L>
typename L::State substituted_state(const typename L::State& x, int i, double theta, double s_i, double zeta_i) {
    typename L::State xb = x;
    xb[L::index(L::n - 1, i)] = theta * s_i + zeta_i;
    return xb;
}

template <class R, class L>
concept DiagonalRegressor = requires(const R& r, int i, const typename L::State& x) {
    { r.value(i, x) } -> std::convertible_to<typename L::WeightVec>;
    { r.gradient(i, x) } -> std::convertible_to<typename L::Gradient>;
};

/// Regressor integral
///   Psi_i = int_0^1 theta (sum_{j != (n,i)} dPhi_ii/dx_j xdot_j) s_i dtheta
///         + int_0^1 Phi_ii nu_i dtheta,
/// both integrands evaluated at the substituted state. Rates of the first
/// n-1 blocks follow from the chain structure; the last block's rate is
/// not measured and is taken from `last_block_rate`.
template <class L, class R>
    requires DiagonalRegressor<R, L>
typename L::Weights psi(const typename L::State& x, const typename L::Channel& S, const typename L::Channel& nu_v,
                        const typename L::Channel& zeta_v, const R& regressor, const GaussLegendre& quad,
                        const typename L::Block& last_block_rate = L::Block::Zero()) {
    typename L::State xdot;
    for (int b = 0; b + 1 < L::n; ++b) xdot.template segment<L::m>(b * L::m) = x.template segment<L::m>((b + 1) * L::m);
    xdot.template segment<L::m>((L::n - 1) * L::m) = last_block_rate;

    typename L::Weights out;
    for (int i = 0; i < L::m; ++i) {
        typename L::State rate = xdot;
        rate[L::index(L::n - 1, i)] = 0.0;
        const typename L::WeightVec row = quad.integrate([&](double theta) -> typename L::WeightVec {
            const typename L::State xb = substituted_state<L>(x, i, theta, S[i], zeta_v[i]);
            typename L::WeightVec g = (theta * S[i]) * (regressor.gradient(i, xb) * rate);
            g += nu_v[i] * regressor.value(i, xb);
            return g;
        });
        out.row(i) = row.transpose();
    }
    return out;
}

/// Delay-compensation term, zero for |s_i| <= eps_rho.
template <class L>
typename L::Channel upsilon(const typename L::Channel& S, const typename L::State& x, const BoundFunctions<L>& bounds,
                            const ControllerParams<L>& p) {
    typename L::Channel out = L::Channel::Zero();
    for (int i = 0; i < L::m; ++i) {
        if (std::abs(S[i]) <= p.eps_rho) continue;
        out[i] = bounds.sum_squares(i, x) / (2.0 * (1.0 - p.tau_bar_max) * S[i] * p.alpha[i]);
    }
    return out;
}

/// rho = (gamma1 + gamma2 ||u1||) / (1 - gamma2 ||beta0^-1||), zero for ||S|| <= eps_rho.
template <class L>
double robust_gain(const typename L::Channel& u1, const typename L::Channel& S, const ControllerParams<L>& p) {
    if (S.norm() <= p.eps_rho) return 0.0;
    return (p.gamma1 + p.gamma2 * u1.norm()) / (1.0 - p.gamma2 * p.beta0_inv_norm());
}

/// Boundary-layer replacement for S / ||S||.
template <class Derived>
typename Derived::PlainObject sat(const Eigen::MatrixBase<Derived>& S, double eps_s) {
    const double n = S.norm();
    if (n <= eps_s) return S / eps_s;
    return S / n;
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <class L>
struct ControlTerms {
    typename L::Channel u1;
    typename L::Channel u2;
    double rho = 0.0;
    typename L::Channel V;
};

/// V = diag(sgn s_i) u1 + u2 with
///   u1 = -beta0^{-1} ((K1 + m/2 alpha)|S| + |W_hat|^T |Psi| + |Upsilon|),
///   u2 = -beta0^{-1} sat(S, eps_s) rho.
template <class L>
ControlTerms<L> control(const typename L::Channel& S, const typename L::Weights& Psi, const typename L::Weights& W_hat,
                        const typename L::Channel& Upsilon, const ControllerParams<L>& p) {
    using Channel = typename L::Channel;
    const Channel inv_beta = p.beta0.cwiseInverse();
    const Channel gain = p.K1 + (0.5 * L::m) * p.alpha;
    const Channel adaptive = (W_hat.cwiseAbs().cwiseProduct(Psi.cwiseAbs())).rowwise().sum();

    ControlTerms<L> t;
    t.u1 = -inv_beta.cwiseProduct(gain.cwiseProduct(S.cwiseAbs()) + adaptive + Upsilon.cwiseAbs());
    t.rho = robust_gain<L>(t.u1, S, p);
    t.u2 = -inv_beta.cwiseProduct(sat(S, p.eps_s)) * t.rho;
    const Channel signs = S.unaryExpr([](double v) { return sgn(v); });
    t.V = signs.cwiseProduct(t.u1) + t.u2;
    return t;
}

/// dW_hat_i/dt = Omega_i Psi_i alpha_ii s_i.
template <class L>
typename L::Weights adapt_rate(const typename L::Weights& Psi, const typename L::Channel& S,
                               const ControllerParams<L>& p) {
    typename L::Weights rate;
    for (int i = 0; i < L::m; ++i) rate.row(i) = p.Omega.row(i).cwiseProduct(Psi.row(i)) * (p.alpha[i] * S[i]);
    return rate;
}

template <class V>
V pd_control(const V& e, const V& e_dot, const V& Kp, const V& Kd) {
    return -Kp.cwiseProduct(e) - Kd.cwiseProduct(e_dot);
}

/// Everything the adaptive law computes in one evaluation.
template <class L>
struct AdaptiveEvaluation {
    typename L::ErrorStack e;
    typename L::Channel S;
    typename L::Channel nu;
    typename L::Channel zeta;
    typename L::Weights Psi;
    typename L::Channel Upsilon;
    ControlTerms<L> terms;
    typename L::Weights W_rate;
};

template <class L, class R>
    requires DiagonalRegressor<R, L>
AdaptiveEvaluation<L> evaluate_adaptive(const typename L::State& x, const typename L::ReferenceStack& yd,
                                        const typename L::Weights& W_hat, const ControllerParams<L>& p,
                                        const BoundFunctions<L>& bounds, const R& regressor,
                                        const GaussLegendre& quad) {
    AdaptiveEvaluation<L> ev;
    ev.e = error_stack<L>(x, yd);
    ev.S = filtered_error<L>(ev.e, p.lambda);
    ev.nu = nu<L>(ev.e, yd, p.lambda);
    ev.zeta = zeta<L>(yd, ev.e, p.lambda);
    ev.Psi = psi<L>(x, ev.S, ev.nu, ev.zeta, regressor, quad);
    ev.Upsilon = upsilon<L>(ev.S, x, bounds, p);
    ev.terms = control<L>(ev.S, ev.Psi, W_hat, ev.Upsilon, p);
    ev.W_rate = adapt_rate<L>(ev.Psi, ev.S, p);
    return ev;
}

}  // namespace dzctl
