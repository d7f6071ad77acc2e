#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dzctl/controller.hpp"
#include "dzctl/deadzone.hpp"
#include "dzctl/delay.hpp"
#include "dzctl/layout.hpp"
#include "dzctl/lyapunov.hpp"
#include "dzctl/robot.hpp"

namespace dzctl {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ControllerKind { adaptive, pd };

/// Desired joint trajectory: amplitude * [sin(w t), cos(w t)] or a fixed setpoint.
struct Trajectory {
    enum class Kind { sincos, setpoint };
    Kind kind = Kind::sincos;
    double amplitude = 1.0;
    double frequency = 1.0;
    robot::Vec2 setpoint = robot::Vec2::Zero();

    /// Columns: y_d, y_d', y_d''.
    RobotLayout::ReferenceStack at(double t) const {
        RobotLayout::ReferenceStack yd = RobotLayout::ReferenceStack::Zero();
        if (kind == Kind::setpoint) {
            yd.col(0) = setpoint;
            return yd;
        }
        const double w = frequency, a = amplitude;
        const double s = std::sin(w * t), c = std::cos(w * t);
        yd.col(0) << a * s, a * c;
        yd.col(1) << a * w * c, -a * w * s;
        yd.col(2) << -a * w * w * s, -a * w * w * c;
        return yd;
    }
};

struct MetricsOptions {
    double tail_window = 5.0;
    double threshold = 0.1;
    double control_window = 1.0;
};

struct LyapunovOptions {
    bool enabled = true;
    CheckRegion region = CheckRegion::outside_layer;
    double tolerance = 1e-6;
};

/// Complete description of one experiment. Defaults reproduce the
/// delayed 2-DOF arm benchmark.
struct ScenarioConfig {
    using P = ControllerParams<RobotLayout>;

    std::string name = "benchmark";
    ControllerKind controller = ControllerKind::adaptive;
    robot::RobotModel robot;
    std::array<DeadZoneChannel, 2> deadzones{DeadZoneChannel{-0.5, 0.5, 0.5, 1.5, 0.3},
                                            DeadZoneChannel{-2.5, 2.0, 1.5, 2.5, 1.1}};
    DelaySpec delays{{DelayFunction::sine(0.22, 0.2), DelayFunction::cosine(1.0, -0.5)}, 0.6};
    P adaptive = default_adaptive();
    double bound_scale = std::numeric_limits<double>::quiet_NaN();  ///< NaN: use m2 l1 l2
    int quadrature_order = 16;
    robot::Vec2 Kp{45.0, 35.0};
    robot::Vec2 Kd{10.0, 10.0};
    Trajectory trajectory;
    robot::Vec2 q0{0.3, 0.5};
    robot::Vec2 qdot0{0.0, 0.0};
    RobotLayout::Weights W0 = RobotLayout::Weights(-0.1, 1.0);
    double horizon = 20.0;
    double step = 1e-3;
    std::string output_dir = "out";
    MetricsOptions metrics;
    LyapunovOptions lyapunov;

    static P default_adaptive() {
        P p;
        p.lambda << 10.0, 5.0;
        p.K1 << 10.0, 5.0;
        p.alpha << 14.0, 14.0;
        p.beta0 << 0.3, 1.1;
        p.gamma1 = 7.2;
        p.gamma2 = 0.2;
        p.Omega << 0.02, 0.1;
        p.eps_s = 0.2;
        p.eps_rho = 0.1;
        p.tau_bar_max = 0.6;
        return p;
    }

    double effective_bound_scale() const { return std::isnan(bound_scale) ? robot.coupling() : bound_scale; }

    /// rho_ik(x_k) = c (1 + ||x_k||^2) for every entry.
    BoundFunctions<RobotLayout> bounds() const {
        const double c = effective_bound_scale();
        return BoundFunctions<RobotLayout>(2, [c](const RobotLayout::Block& xk) { return c * (1.0 + xk.squaredNorm()); });
    }

    RobotLayout::State initial_state() const {
        RobotLayout::State x;
        x << q0, qdot0;
        return x;
    }

    void validate() const {
        try {
            robot.validate();
            if (!(step > 0.0 && std::isfinite(step))) throw std::invalid_argument("sim.step must be positive");
            if (!(horizon >= 0.0 && std::isfinite(horizon))) throw std::invalid_argument("sim.horizon must be >= 0");
            if (std::abs(std::round(horizon / step) * step - horizon) > 1e-9 * std::max(1.0, horizon))
                throw std::invalid_argument("sim.horizon must be a whole number of steps");
            if (delays.size() != 2) throw std::invalid_argument("exactly two delay channels are required");
            delays.validate(0.0, horizon, step);
            adaptive.validate();
            if (std::abs(adaptive.tau_bar_max - delays.tau_bar_max) > 0.0)
                throw std::invalid_argument("tau_bar_max mismatch between delays and controller");
            for (int i = 0; i < 2; ++i) {
                DeadZoneChannel ch = deadzones[static_cast<std::size_t>(i)];
                ch.beta0 = adaptive.beta0[i];
                try {
                    ch.validate();
                } catch (const std::invalid_argument& e) {
                    throw std::invalid_argument("channel " + std::to_string(i + 1) + ": " + e.what());
                }
            }
            if (!(effective_bound_scale() > 0.0)) throw std::invalid_argument("adaptive.bound_scale must be positive");
            if (quadrature_order < 1) throw std::invalid_argument("adaptive.quadrature must be >= 1");
            if (!(Kp.array() >= 0.0).all() || !(Kd.array() >= 0.0).all())
                throw std::invalid_argument("pd gains must be nonnegative");
            if (!q0.allFinite() || !qdot0.allFinite() || !W0.allFinite())
                throw std::invalid_argument("initial values must be finite");
            if (!(metrics.tail_window >= 0.0 && metrics.threshold > 0.0 && metrics.control_window >= 0.0))
                throw std::invalid_argument("bad metrics options");
            if (!(lyapunov.tolerance >= 0.0)) throw std::invalid_argument("lyapunov.tolerance must be >= 0");
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid config: ") + e.what());
        }
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_values(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline double parse_double(std::string_view s, const std::string& key) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError("config key '" + key + "': not a finite number: '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

/// Flat `key = value` configuration. `#` starts a comment; vector values are
/// separated by spaces or commas. Every key is optional.
class ConfigParser {
public:
    static ScenarioConfig parse(std::string_view text, ScenarioConfig cfg = {}) {
        std::map<std::string, std::string> entries;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view view(line);
            if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
            view = detail::trim(view);
            if (view.empty()) continue;
            const auto eq = view.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key(detail::trim(view.substr(0, eq)));
            const std::string value(detail::trim(view.substr(eq + 1)));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            if (!entries.emplace(key, value).second)
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        for (const auto& [key, value] : entries) apply(cfg, key, value);
        cfg.validate();
        return cfg;
    }

    static ScenarioConfig load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file '" + path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

private:
    static double scalar(const std::string& key, const std::string& value) {
        const auto parts = detail::split_values(value);
        if (parts.size() != 1) throw ConfigError("config key '" + key + "': expected one number");
        return detail::parse_double(parts[0], key);
    }

    static robot::Vec2 pair(const std::string& key, const std::string& value) {
        const auto parts = detail::split_values(value);
        if (parts.size() != 2) throw ConfigError("config key '" + key + "': expected two numbers");
        return {detail::parse_double(parts[0], key), detail::parse_double(parts[1], key)};
    }

    static bool boolean(const std::string& key, const std::string& value) {
        if (value == "true" || value == "1" || value == "yes") return true;
        if (value == "false" || value == "0" || value == "no") return false;
        throw ConfigError("config key '" + key + "': expected true/false");
    }

    static DelayFunction delay(const std::string& key, const std::string& value) {
        const auto parts = detail::split_values(value);
        if (parts.empty()) throw ConfigError("config key '" + key + "': empty delay");
        auto num = [&](std::size_t i) { return detail::parse_double(parts[i], key); };
        if (parts[0] == "constant" && parts.size() == 2) return DelayFunction::constant(num(1));
        if (parts[0] == "sin" && (parts.size() == 3 || parts.size() == 4))
            return DelayFunction::sine(num(1), num(2), parts.size() == 4 ? num(3) : 1.0);
        if (parts[0] == "cos" && (parts.size() == 3 || parts.size() == 4))
            return DelayFunction::cosine(num(1), num(2), parts.size() == 4 ? num(3) : 1.0);
        throw ConfigError("config key '" + key +
                          "': expected 'constant <tau>', 'sin <offset> <amp> [rate]' or 'cos <offset> <amp> [rate]'");
    }

    static void apply(ScenarioConfig& c, const std::string& key, const std::string& v) {
        auto& p = c.adaptive;
        if (key == "scenario.name") {
            if (v.empty() || v.find_first_of("/\\ ") != std::string::npos)
                throw ConfigError("scenario.name must be a plain file-name fragment");
            c.name = v;
        } else if (key == "controller") {
            if (v == "adaptive") c.controller = ControllerKind::adaptive;
            else if (v == "pd") c.controller = ControllerKind::pd;
            else throw ConfigError("controller must be 'adaptive' or 'pd'");
        } else if (key == "robot.m1") c.robot.m1 = scalar(key, v);
        else if (key == "robot.m2") c.robot.m2 = scalar(key, v);
        else if (key == "robot.l1") c.robot.l1 = scalar(key, v);
        else if (key == "robot.l2") c.robot.l2 = scalar(key, v);
        else if (key == "robot.g") c.robot.g = scalar(key, v);
        else if (key == "robot.d2_gravity") c.robot.gravity_on_d2 = boolean(key, v);
        else if (key.rfind("deadzone", 0) == 0 && key.size() > 10 && (key[8] == '1' || key[8] == '2') && key[9] == '.') {
            auto& ch = c.deadzones[static_cast<std::size_t>(key[8] - '1')];
            const std::string field = key.substr(10);
            if (field == "k_l") ch.k_l = scalar(key, v);
            else if (field == "k_r") ch.k_r = scalar(key, v);
            else if (field == "b_l") ch.b_l = scalar(key, v);
            else if (field == "b_r") ch.b_r = scalar(key, v);
            else throw ConfigError("unknown config key '" + key + "'");
        } else if (key == "delay1") c.delays.channels.at(0) = delay(key, v);
        else if (key == "delay2") c.delays.channels.at(1) = delay(key, v);
        else if (key == "tau_bar_max") {
            c.delays.tau_bar_max = scalar(key, v);
            p.tau_bar_max = c.delays.tau_bar_max;
        } else if (key == "adaptive.lambda") p.lambda = pair(key, v);
        else if (key == "adaptive.K1") p.K1 = pair(key, v);
        else if (key == "adaptive.alpha") p.alpha = pair(key, v);
        else if (key == "adaptive.beta0") p.beta0 = pair(key, v);
        else if (key == "adaptive.gamma1") p.gamma1 = scalar(key, v);
        else if (key == "adaptive.gamma2") p.gamma2 = scalar(key, v);
        else if (key == "adaptive.Omega") p.Omega = pair(key, v);
        else if (key == "adaptive.eps_s") p.eps_s = scalar(key, v);
        else if (key == "adaptive.eps_rho") p.eps_rho = scalar(key, v);
        else if (key == "adaptive.bound_scale") c.bound_scale = scalar(key, v);
        else if (key == "adaptive.quadrature") {
            const double q = scalar(key, v);
            if (q != std::floor(q) || q < 1 || q > 256) throw ConfigError("adaptive.quadrature must be an integer in [1, 256]");
            c.quadrature_order = static_cast<int>(q);
        } else if (key == "pd.Kp") c.Kp = pair(key, v);
        else if (key == "pd.Kd") c.Kd = pair(key, v);
        else if (key == "trajectory") {
            if (v == "sincos") c.trajectory.kind = Trajectory::Kind::sincos;
            else if (v == "setpoint") c.trajectory.kind = Trajectory::Kind::setpoint;
            else throw ConfigError("trajectory must be 'sincos' or 'setpoint'");
        } else if (key == "trajectory.amplitude") c.trajectory.amplitude = scalar(key, v);
        else if (key == "trajectory.frequency") c.trajectory.frequency = scalar(key, v);
        else if (key == "trajectory.setpoint") c.trajectory.setpoint = pair(key, v);
        else if (key == "initial.q") c.q0 = pair(key, v);
        else if (key == "initial.qdot") c.qdot0 = pair(key, v);
        else if (key == "initial.W_hat") c.W0 = pair(key, v);
        else if (key == "sim.horizon") c.horizon = scalar(key, v);
        else if (key == "sim.step") c.step = scalar(key, v);
        else if (key == "output.dir") c.output_dir = v;
        else if (key == "metrics.tail_window") c.metrics.tail_window = scalar(key, v);
        else if (key == "metrics.threshold") c.metrics.threshold = scalar(key, v);
        else if (key == "metrics.control_window") c.metrics.control_window = scalar(key, v);
        else if (key == "lyapunov.enabled") c.lyapunov.enabled = boolean(key, v);
        else if (key == "lyapunov.tolerance") c.lyapunov.tolerance = scalar(key, v);
        else if (key == "lyapunov.region") {
            if (v == "outside_layer") c.lyapunov.region = CheckRegion::outside_layer;
            else if (v == "every_channel") c.lyapunov.region = CheckRegion::every_channel;
            else throw ConfigError("lyapunov.region must be 'outside_layer' or 'every_channel'");
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
};

}  // namespace dzctl
