#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dzctl {

/// Delay profile tau(t) = offset + amplitude * wave(rate * t), wave in {none, sin, cos}.
struct DelayFunction {
    enum class Kind { constant, sine, cosine };

    Kind kind = Kind::constant;
    double offset = 0.0;
    double amplitude = 0.0;
    double rate = 1.0;

    static DelayFunction constant(double tau) { return {Kind::constant, tau, 0.0, 1.0}; }
    static DelayFunction sine(double offset, double amplitude, double rate = 1.0) {
        return {Kind::sine, offset, amplitude, rate};
    }
    static DelayFunction cosine(double offset, double amplitude, double rate = 1.0) {
        return {Kind::cosine, offset, amplitude, rate};
    }

    double operator()(double t) const {
        switch (kind) {
            case Kind::sine: return offset + amplitude * std::sin(rate * t);
            case Kind::cosine: return offset + amplitude * std::cos(rate * t);
            case Kind::constant: break;
        }
        return offset;
    }

    double derivative(double t) const {
        switch (kind) {
            case Kind::sine: return amplitude * rate * std::cos(rate * t);
            case Kind::cosine: return -amplitude * rate * std::sin(rate * t);
            case Kind::constant: break;
        }
        return 0.0;
    }
};

/// Per-channel delays tau_k(t) with the declared rate bound tau_bar_max.
struct DelaySpec {
    std::vector<DelayFunction> channels;
    double tau_bar_max = 0.0;

    std::size_t size() const { return channels.size(); }
    double operator()(std::size_t k, double t) const { return channels.at(k)(t); }

    /// Checks positivity, tau >= step, and the rate bound on a grid over
    /// [t0, t0 + horizon]. Throws std::invalid_argument on violation.
    void validate(double t0, double horizon, double step) const {
        if (!(tau_bar_max >= 0.0 && tau_bar_max < 1.0))
            throw std::invalid_argument("delay: tau_bar_max must lie in [0, 1), got " + std::to_string(tau_bar_max));
        const auto samples = static_cast<long>(std::max(1000.0, std::ceil(horizon / step))) ;
        for (std::size_t k = 0; k < channels.size(); ++k) {
            const auto& tau = channels[k];
            double min_tau = tau(t0), max_rate = tau.derivative(t0);
            for (long j = 0; j <= samples; ++j) {
                const double t = t0 + horizon * static_cast<double>(j) / static_cast<double>(samples);
                min_tau = std::min(min_tau, tau(t));
                max_rate = std::max(max_rate, tau.derivative(t));
            }
            const std::string name = "delay " + std::to_string(k + 1);
            if (!(min_tau > 0.0)) throw std::invalid_argument(name + ": tau must stay positive");
            if (min_tau < step)
                throw std::invalid_argument(name + ": min tau " + std::to_string(min_tau) + " is below the step " +
                                            std::to_string(step));
            if (max_rate > tau_bar_max)
                throw std::invalid_argument(name + ": max d(tau)/dt " + std::to_string(max_rate) +
                                            " exceeds tau_bar_max " + std::to_string(tau_bar_max));
        }
    }
};

}  // namespace dzctl
