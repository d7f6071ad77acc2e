#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "dzctl/controller.hpp"
#include "dzctl/dde.hpp"
#include "dzctl/delay.hpp"
#include "dzctl/layout.hpp"
#include "dzctl/quadrature.hpp"

namespace dzctl {

struct LyapunovSample {
    double t = 0.0;
    double v1 = 0.0;
    double va = 0.0;
    double vu = 0.0;
    double v2 = 0.0;

    static LyapunovSample make(double t, double v1, double va, double vu) { return {t, v1, va, vu, v1 + va + vu}; }
};

/// V1 = sum_i s_i^2 int_0^1 theta b_dii(x_bar_i) alpha_ii dtheta, where
/// `diag_inertia(i, x)` returns b_dii at a (substituted) state.
template <class L, class DiagInertia>
double v1(const typename L::Channel& S, const typename L::State& x, const typename L::Channel& zeta_v,
          const typename L::Channel& alpha, DiagInertia&& diag_inertia, const GaussLegendre& quad) {
    double total = 0.0;
    for (int i = 0; i < L::m; ++i) {
        if (S[i] == 0.0) continue;
        const double weight = quad.integrate([&](double theta) {
            return theta * diag_inertia(i, substituted_state<L>(x, i, theta, S[i], zeta_v[i])) * alpha[i];
        });
        total += S[i] * S[i] * weight;
    }
    return total;
}

/// V_a = sum_i 1/2 W~_i^T Omega_i^{-1} W~_i, W~ = W - W_hat.
template <class W>
double v_a(const W& W_hat, const W& W_true, const W& Omega) {
    const W err = W_true - W_hat;
    return 0.5 * err.cwiseProduct(err).cwiseQuotient(Omega).sum();
}

/// V_U = sum_j sum_k [2(1 - tau_bar)]^{-1} int_{t - tau_k(t)}^t rho_jk(x_k(s))^2 ds.
/// Delay channel k pairs with state block k. The integral is a composite
/// trapezoid on the history grid with interpolated end points; the part
/// before t0 uses the constant initial state.
template <class L>
double v_u(const HistoryBuffer<typename L::State>& history, double t, const DelaySpec& delays,
           const BoundFunctions<L>& bounds, double tau_bar_max) {
    if (static_cast<int>(delays.size()) != bounds.blocks())
        throw std::invalid_argument("v_u: bound table and delay spec disagree on the number of channels");
    if (history.empty() || t > history.last_time())
        throw ExtrapolationError("v_u: history does not reach t");

    const double t0 = history.t0();
    const double h = history.step();
    double total = 0.0;
    for (int k = 0; k < bounds.blocks(); ++k) {
        auto integrand = [&](const typename L::State& x) {
            const typename L::Block xk = x.template segment<L::m>(k * L::m);
            double acc = 0.0;
            for (int j = 0; j < L::m; ++j) {
                const double r = bounds(j, k, xk);
                acc += r * r;
            }
            return acc;
        };

        const double a = t - delays(static_cast<std::size_t>(k), t);
        double integral = 0.0;
        if (a < t0) integral += (std::min(t, t0) - a) * integrand(history.initial_state());

        const double lo = std::max(a, t0);
        if (t > lo) {
            // grid indices strictly inside (lo, t)
            auto first = static_cast<long>(std::floor((lo - t0) / h)) + 1;
            while (first > 0 && history.time(static_cast<std::size_t>(first - 1)) > lo) --first;
            double prev_t = lo;
            double prev_f = integrand(history.sample(lo));
            for (long g = first;; ++g) {
                const double tg = history.time(static_cast<std::size_t>(g));
                if (!(tg < t)) break;
                if (tg <= lo) continue;
                const double fg = integrand(history.state(static_cast<std::size_t>(g)));
                integral += 0.5 * (tg - prev_t) * (prev_f + fg);
                prev_t = tg;
                prev_f = fg;
            }
            const double ft = integrand(history.sample(t));
            integral += 0.5 * (t - prev_t) * (prev_f + ft);
        }
        total += integral;
    }
    return total / (2.0 * (1.0 - tau_bar_max));
}

enum class CheckRegion {
    outside_layer,   ///< ||S|| > eps_s, the sat boundary layer
    every_channel,   ///< min_i |s_i| > eps_s
};

struct DecreaseReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0;
    double worst_time = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> violation_steps;

    double fraction() const { return checked == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(checked); }
};

/// Checks V2(t+h) - V2(t) <= -h S^T alpha K1 S + tol_scale (1 + V2(t)) on
/// the steps whose starting S lies in `region`.
template <class Channel>
DecreaseReport decrease_report(std::span<const LyapunovSample> samples, std::span<const Channel> S_series,
                               const Channel& alpha, const Channel& K1, double eps_s, double tol_scale,
                               CheckRegion region = CheckRegion::outside_layer) {
    if (samples.size() != S_series.size()) throw std::invalid_argument("decrease_report: series length mismatch");
    DecreaseReport rep;
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        const Channel& S = S_series[k];
        const bool in_region = region == CheckRegion::outside_layer ? S.norm() > eps_s
                                                                     : S.cwiseAbs().minCoeff() > eps_s;
        if (!in_region) continue;
        ++rep.checked;
        const double h = samples[k + 1].t - samples[k].t;
        const double bound = -h * S.dot(alpha.cwiseProduct(K1).cwiseProduct(S));
        const double tol = tol_scale * (1.0 + std::abs(samples[k].v2));
        const double excess = (samples[k + 1].v2 - samples[k].v2) - bound - tol;
        if (excess > 0.0) {
            ++rep.violations;
            rep.violation_steps.push_back(k);
            if (excess > rep.worst_excess) {
                rep.worst_excess = excess;
                rep.worst_time = samples[k].t;
            }
        }
    }
    return rep;
}

}  // namespace dzctl
