#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace dzctl {

/// Raised by HistoryBuffer::sample for queries past the last stored time.
class ExtrapolationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A failure inside the integration loop, tagged with the step's start time.
class StepError : public std::runtime_error {
public:
    StepError(double t, const std::string& what)
        : std::runtime_error("t=" + std::to_string(t) + ": " + what), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

/// Uniformly spaced (t, x, xdot) samples with cubic Hermite lookup.
/// Queries at or before t0 return the initial state (constant pre-history).
template <class State>
class HistoryBuffer {
public:
    HistoryBuffer(double t0, double step, State initial_state)
        : t0_(t0), step_(step), initial_(std::move(initial_state)) {
        if (!(step > 0.0) || !std::isfinite(step))
            throw std::invalid_argument("HistoryBuffer: step must be positive and finite");
    }

    double t0() const { return t0_; }
    double step() const { return step_; }
    const State& initial_state() const { return initial_; }
    std::size_t size() const { return xs_.size(); }
    bool empty() const { return xs_.empty(); }

    double time(std::size_t k) const { return t0_ + static_cast<double>(k) * step_; }
    double last_time() const {
        if (empty()) throw ExtrapolationError("HistoryBuffer: empty");
        return time(xs_.size() - 1);
    }
    const State& state(std::size_t k) const { return xs_.at(k); }
    const State& derivative(std::size_t k) const { return xdots_.at(k); }

    /// Appends the next sample; `t` must be t0 + size()*step.
    void push(double t, const State& x, const State& xdot) {
        const double expected = time(xs_.size());
        if (!(std::abs(t - expected) <= 1e-9 * step_)) {
            throw std::invalid_argument("HistoryBuffer::push: expected t=" + std::to_string(expected) +
                                        ", got t=" + std::to_string(t));
        }
        xs_.push_back(x);
        xdots_.push_back(xdot);
    }

    State sample(double t) const {
        if (!std::isfinite(t)) throw ExtrapolationError("HistoryBuffer::sample: non-finite query");
        if (t <= t0_) return initial_;
        if (empty()) throw ExtrapolationError("HistoryBuffer::sample: empty buffer");
        const double last = last_time();
        if (t > last) {
            throw ExtrapolationError("HistoryBuffer::sample: query t=" + std::to_string(t) +
                                     " beyond last stored t=" + std::to_string(last));
        }

        const double u = (t - t0_) / step_;
        const auto nearest = static_cast<std::size_t>(std::llround(u));
        if (nearest < xs_.size() && time(nearest) == t) return xs_[nearest];

        std::size_t k = static_cast<std::size_t>(std::floor(u));
        if (k + 1 >= xs_.size()) k = xs_.size() - 2;
        const double th = (t - time(k)) / step_;
        const double th2 = th * th, th3 = th2 * th;
        const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
        const double h10 = th3 - 2.0 * th2 + th;
        const double h01 = -2.0 * th3 + 3.0 * th2;
        const double h11 = th3 - th2;
        State out = h00 * xs_[k] + (h10 * step_) * xdots_[k] + h01 * xs_[k + 1] + (h11 * step_) * xdots_[k + 1];
        return out;
    }

private:
    double t0_;
    double step_;
    State initial_;
    std::vector<State> xs_;
    std::vector<State> xdots_;
};

/// RK4 step reusing an already evaluated first stage.
template <class State, class Rhs>
State rk4_step_from(Rhs&& rhs, double t, const State& x, double h, const HistoryBuffer<State>& history,
                    const State& k1) {
    const double half = 0.5 * h;
    const State k2 = rhs(t + half, State(x + half * k1), history);
    const State k3 = rhs(t + half, State(x + half * k2), history);
    const State k4 = rhs(t + h, State(x + h * k3), history);
    State next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return next;
}

/// Classical RK4 step. `rhs(t, x, history)` may sample the history at
/// delayed times, which must not exceed `t` (delays no shorter than h).
template <class State, class Rhs>
State rk4_step(Rhs&& rhs, double t, const State& x, double h, const HistoryBuffer<State>& history) {
    const State k1 = rhs(t, x, history);
    return rk4_step_from(std::forward<Rhs>(rhs), t, x, h, history, k1);
}

template <class State>
struct RunSpec {
    double t0 = 0.0;
    double horizon = 0.0;
    double step = 1e-3;
    State initial_state;
};

template <class State>
struct RunResult {
    HistoryBuffer<State> history;
    std::size_t steps = 0;
};

/// Fixed-step DDE driver with a zero-order-hold controller.
///
/// At every grid time t_k the loop calls `controller.compute(t_k, x_k, history)`
/// to obtain the held input, stores (t_k, x_k, f(t_k, x_k, input)) in the
/// history, reports the sample through `observe(t_k, x_k, input)`, then
/// advances the plant with RK4 and the controller with `controller.advance(h)`.
/// The last grid time is observed but not advanced.
template <class State, class Controller, class Dynamics, class Observer>
RunResult<State> run(const RunSpec<State>& spec, Controller& controller, Dynamics&& dynamics,
                     Observer&& observe) {
    if (!(spec.step > 0.0) || !std::isfinite(spec.step)) throw std::invalid_argument("run: step must be > 0");
    if (!(spec.horizon >= 0.0) || !std::isfinite(spec.horizon))
        throw std::invalid_argument("run: horizon must be >= 0");

    const auto steps = static_cast<std::size_t>(std::llround(spec.horizon / spec.step));
    RunResult<State> result{HistoryBuffer<State>(spec.t0, spec.step, spec.initial_state), steps};
    auto& history = result.history;

    State x = spec.initial_state;
    for (std::size_t k = 0;; ++k) {
        const double t = history.time(k);
        try {
            const auto input = controller.compute(t, x, std::as_const(history));
            auto rhs = [&](double tt, const State& xx, const HistoryBuffer<State>& hist) -> State {
                return dynamics(tt, xx, input, hist);
            };
            const State k1 = rhs(t, x, history);
            history.push(t, x, k1);
            observe(t, x, input);
            if (k == steps) break;

            State next = rk4_step_from(rhs, t, x, spec.step, history, k1);
            if (!next.allFinite()) throw std::runtime_error("non-finite state after step");
            controller.advance(spec.step);
            x = std::move(next);
        } catch (const StepError&) {
            throw;
        } catch (const std::exception& e) {
            throw StepError(t, e.what());
        }
    }
    return result;
}

}  // namespace dzctl
