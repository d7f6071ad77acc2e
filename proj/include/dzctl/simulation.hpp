#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <charconv>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dzctl/config.hpp"
#include "dzctl/controller.hpp"
#include "dzctl/dde.hpp"
#include "dzctl/deadzone.hpp"
#include "dzctl/lyapunov.hpp"
#include "dzctl/quadrature.hpp"
#include "dzctl/robot.hpp"

namespace dzctl {

/// One logged time sample. Column order is fixed.
struct TrajectoryRecord {
    double t = 0, q1 = 0, q2 = 0, yd1 = 0, yd2 = 0, e1 = 0, e2 = 0, s1 = 0, s2 = 0;
    double v1 = 0, v2 = 0;  ///< controller outputs
    double u1 = 0, u2 = 0;  ///< dead-zone outputs
    double W1 = 0, W2 = 0;
    double V1 = 0, Va = 0, VU = 0, V2 = 0;

    static constexpr std::size_t columns = 19;
    static constexpr std::array<std::string_view, columns> header{"t",  "q1", "q2", "yd1", "yd2", "e1", "e2",
                                                                  "s1", "s2", "v1", "v2",  "u1",  "u2", "W1",
                                                                  "W2", "V1", "Va", "VU",  "V2"};

    std::array<double, columns> values() const {
        return {t, q1, q2, yd1, yd2, e1, e2, s1, s2, v1, v2, u1, u2, W1, W2, V1, Va, VU, V2};
    }

    static TrajectoryRecord from_values(const std::array<double, columns>& a) {
        return {a[0],  a[1],  a[2],  a[3],  a[4],  a[5],  a[6],  a[7],  a[8], a[9],
                a[10], a[11], a[12], a[13], a[14], a[15], a[16], a[17], a[18]};
    }

    robot::Vec2 error() const { return {e1, e2}; }
    robot::Vec2 control() const { return {v1, v2}; }
};

struct Metrics {
    std::array<double, 2> rms_tail{};
    std::array<double, 2> max_abs_tail{};
    std::array<double, 2> t_conv_joint{};
    double t_conv = 0.0;    ///< horizon sentinel when not settled at the end
    double max_v0 = 0.0;    ///< max ||V|| over the initial control window
    double tail_window = 0.0;
    bool converged = false; ///< max |e_i| over the tail below the threshold
};

/// Tail RMS, settling time and early control effort of a record stream.
inline Metrics metrics(const std::vector<TrajectoryRecord>& records, const MetricsOptions& opt) {
    if (records.empty()) throw std::invalid_argument("metrics: no records");
    const double t_first = records.front().t;
    const double t_last = records.back().t;
    const double span = t_last - t_first;
    if (opt.tail_window > span + 1e-9)
        throw std::invalid_argument("metrics: tail window " + std::to_string(opt.tail_window) +
                                    " s is longer than the horizon " + std::to_string(span) + " s");

    Metrics m;
    m.tail_window = opt.tail_window;
    const double tail_start = t_last - opt.tail_window - 1e-9;
    std::array<double, 2> sum_sq{};
    std::size_t tail_count = 0;
    for (const auto& r : records) {
        if (r.t >= tail_start) {
            ++tail_count;
            sum_sq[0] += r.e1 * r.e1;
            sum_sq[1] += r.e2 * r.e2;
            m.max_abs_tail[0] = std::max(m.max_abs_tail[0], std::abs(r.e1));
            m.max_abs_tail[1] = std::max(m.max_abs_tail[1], std::abs(r.e2));
        }
        if (r.t <= t_first + opt.control_window + 1e-9) m.max_v0 = std::max(m.max_v0, std::hypot(r.v1, r.v2));
    }
    for (int i = 0; i < 2; ++i) m.rms_tail[i] = std::sqrt(sum_sq[i] / static_cast<double>(tail_count));

    auto settle = [&](auto&& magnitude) {
        std::size_t last_bad = records.size();
        for (std::size_t k = 0; k < records.size(); ++k)
            if (!(magnitude(records[k]) < opt.threshold)) last_bad = k;
        if (last_bad == records.size()) return t_first;
        if (last_bad + 1 == records.size()) return t_last;
        return records[last_bad + 1].t;
    };
    m.t_conv_joint[0] = settle([](const TrajectoryRecord& r) { return std::abs(r.e1); });
    m.t_conv_joint[1] = settle([](const TrajectoryRecord& r) { return std::abs(r.e2); });
    m.t_conv = settle([](const TrajectoryRecord& r) { return std::max(std::abs(r.e1), std::abs(r.e2)); });
    m.converged = std::max(m.max_abs_tail[0], m.max_abs_tail[1]) < opt.threshold;
    return m;
}

struct ScenarioResult {
    std::string name;
    std::vector<TrajectoryRecord> records;
    std::vector<LyapunovSample> lyapunov;
    std::vector<robot::Vec2> S_series;
    DecreaseReport decrease;
    Metrics metrics;
};

namespace detail {

class AdaptiveLoop {
public:
    AdaptiveLoop(const ScenarioConfig& cfg, const GaussLegendre& quad)
        : cfg_(cfg), bounds_(cfg.bounds()), quad_(quad), W_(cfg.W0) {}

    robot::Vec2 compute(double t, const robot::State& x, const HistoryBuffer<robot::State>&) {
        last_ = evaluate_adaptive<RobotLayout>(x, cfg_.trajectory.at(t), W_, cfg_.adaptive, bounds_, regressor_, quad_);
        W_at_compute_ = W_;
        return last_.terms.V;
    }

    // constant rate over the step: the RK4 update reduces to h * rate
    void advance(double h) { W_ += h * last_.W_rate; }

    const AdaptiveEvaluation<RobotLayout>& last() const { return last_; }
    const RobotLayout::Weights& weights() const { return W_at_compute_; }

private:
    const ScenarioConfig& cfg_;
    BoundFunctions<RobotLayout> bounds_;
    const GaussLegendre& quad_;
    robot::Regressor regressor_;
    RobotLayout::Weights W_;
    RobotLayout::Weights W_at_compute_;
    AdaptiveEvaluation<RobotLayout> last_;
};

class PdLoop {
public:
    explicit PdLoop(const ScenarioConfig& cfg) : cfg_(cfg) {}

    robot::Vec2 compute(double t, const robot::State& x, const HistoryBuffer<robot::State>&) {
        const auto yd = cfg_.trajectory.at(t);
        const auto e = error_stack<RobotLayout>(x, yd);
        return pd_control<robot::Vec2>(e.col(0), e.col(1), cfg_.Kp, cfg_.Kd);
    }

    void advance(double) {}
    const RobotLayout::Weights& weights() const { return cfg_.W0; }

private:
    const ScenarioConfig& cfg_;
};

}  // namespace detail

/// Runs one scenario end to end: integration, logging, Lyapunov monitor
/// (a post-pass over the stored history) and metrics.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const GaussLegendre quad(cfg.quadrature_order);
    const auto& model = cfg.robot;
    const auto& delays = cfg.delays;
    const auto& dz = cfg.deadzones;

    auto actuator = [&](const robot::Vec2& V) -> robot::Vec2 {
        return {dead_zone_output(V[0], dz[0]), dead_zone_output(V[1], dz[1])};
    };
    auto dynamics = [&](double t, const robot::State& x, const robot::Vec2& V,
                        const HistoryBuffer<robot::State>& hist) -> robot::State {
        return robot::rhs(x, hist.sample(t - delays(0, t)), hist.sample(t - delays(1, t)), actuator(V), model);
    };

    ScenarioResult res;
    res.name = cfg.name;
    std::vector<robot::Vec2> zetas;
    RunSpec<robot::State> spec{0.0, cfg.horizon, cfg.step, cfg.initial_state()};
    const auto expected = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step)) + 1;
    res.records.reserve(expected);
    res.S_series.reserve(expected);
    zetas.reserve(expected);

    auto log = [&](double t, const robot::State& x, const robot::Vec2& V, const robot::Vec2& S,
                   const robot::Vec2& zeta_v, const RobotLayout::Weights& W) {
        const auto yd = cfg.trajectory.at(t);
        const robot::Vec2 u = actuator(V);
        TrajectoryRecord r;
        r.t = t;
        r.q1 = x[0];
        r.q2 = x[1];
        r.yd1 = yd(0, 0);
        r.yd2 = yd(1, 0);
        r.e1 = x[0] - yd(0, 0);
        r.e2 = x[1] - yd(1, 0);
        r.s1 = S[0];
        r.s2 = S[1];
        r.v1 = V[0];
        r.v2 = V[1];
        r.u1 = u[0];
        r.u2 = u[1];
        r.W1 = W(0, 0);
        r.W2 = W(1, 0);
        res.records.push_back(r);
        res.S_series.push_back(S);
        zetas.push_back(zeta_v);
    };

    std::optional<HistoryBuffer<robot::State>> history;
    if (cfg.controller == ControllerKind::adaptive) {
        detail::AdaptiveLoop loop(cfg, quad);
        auto out = run(spec, loop, dynamics, [&](double t, const robot::State& x, const robot::Vec2& V) {
            log(t, x, V, loop.last().S, loop.last().zeta, loop.weights());
        });
        history.emplace(std::move(out.history));
    } else {
        detail::PdLoop loop(cfg);
        auto out = run(spec, loop, dynamics, [&](double t, const robot::State& x, const robot::Vec2& V) {
            const auto yd = cfg.trajectory.at(t);
            const auto e = error_stack<RobotLayout>(x, yd);
            log(t, x, V, filtered_error<RobotLayout>(e, cfg.adaptive.lambda),
                zeta<RobotLayout>(yd, e, cfg.adaptive.lambda), loop.weights());
        });
        history.emplace(std::move(out.history));
    }

    if (cfg.lyapunov.enabled) {
        const auto bounds = cfg.bounds();
        const auto W_true = robot::true_weights(model);
        auto b_diag = [&](int i, const robot::State& x) {
            return robot::inertia_diag(robot::positions(x), model)(i, i);
        };
        res.lyapunov.reserve(res.records.size());
        for (std::size_t k = 0; k < res.records.size(); ++k) {
            auto& r = res.records[k];
            const robot::State& x = history->state(k);
            const RobotLayout::Weights W_hat(r.W1, r.W2);
            const auto sample = LyapunovSample::make(
                r.t, v1<RobotLayout>(res.S_series[k], x, zetas[k], cfg.adaptive.alpha, b_diag, quad),
                v_a(W_hat, W_true, cfg.adaptive.Omega), v_u<RobotLayout>(*history, r.t, delays, bounds, cfg.adaptive.tau_bar_max));
            r.V1 = sample.v1;
            r.Va = sample.va;
            r.VU = sample.vu;
            r.V2 = sample.v2;
            res.lyapunov.push_back(sample);
        }
        res.decrease = decrease_report<robot::Vec2>(res.lyapunov, res.S_series, cfg.adaptive.alpha, cfg.adaptive.K1,
                                                    cfg.adaptive.eps_s, cfg.lyapunov.tolerance, cfg.lyapunov.region);
    }

    MetricsOptions mopt = cfg.metrics;
    mopt.tail_window = std::min(mopt.tail_window, cfg.horizon);
    res.metrics = metrics(res.records, mopt);
    return res;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
    for (std::size_t c = 0; c < TrajectoryRecord::columns; ++c) os << (c ? "," : "") << TrajectoryRecord::header[c];
    os << '\n';
    for (const auto& r : records) {
        const auto vals = r.values();
        for (std::size_t c = 0; c < vals.size(); ++c) os << (c ? "," : "") << format_double(vals[c]);
        os << '\n';
    }
}

inline std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory csv: missing header");
    std::string expected;
    for (std::size_t c = 0; c < TrajectoryRecord::columns; ++c)
        expected += (c ? "," : "") + std::string(TrajectoryRecord::header[c]);
    if (line != expected) throw std::runtime_error("trajectory csv: unexpected header '" + line + "'");

    std::vector<TrajectoryRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, TrajectoryRecord::columns> vals{};
        std::size_t col = 0, pos = 0;
        while (col < vals.size()) {
            const auto next = line.find(',', pos);
            const std::string_view cell(line.data() + pos, (next == std::string::npos ? line.size() : next) - pos);
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), vals[col]);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw std::runtime_error("trajectory csv: bad number '" + std::string(cell) + "'");
            ++col;
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (col != vals.size()) throw std::runtime_error("trajectory csv: wrong column count");
        out.push_back(TrajectoryRecord::from_values(vals));
    }
    return out;
}

inline void write_lyapunov_csv(std::ostream& os, const ScenarioResult& res, const ScenarioConfig& cfg) {
    os << "t,V1,Va,VU,V2,dV2,bound,checked,violation\n";
    std::vector<bool> violated(res.lyapunov.size(), false);
    for (auto k : res.decrease.violation_steps) violated[k] = true;
    const auto& a = cfg.adaptive;
    for (std::size_t k = 0; k < res.lyapunov.size(); ++k) {
        const auto& L = res.lyapunov[k];
        const auto& S = res.S_series[k];
        const bool last = k + 1 == res.lyapunov.size();
        const double dv2 = last ? 0.0 : res.lyapunov[k + 1].v2 - L.v2;
        const double h = last ? 0.0 : res.lyapunov[k + 1].t - L.t;
        const double bound = -h * S.dot(a.alpha.cwiseProduct(a.K1).cwiseProduct(S));
        const bool checked = !last && (cfg.lyapunov.region == CheckRegion::outside_layer
                                           ? S.norm() > a.eps_s
                                           : S.cwiseAbs().minCoeff() > a.eps_s);
        os << format_double(L.t) << ',' << format_double(L.v1) << ',' << format_double(L.va) << ','
           << format_double(L.vu) << ',' << format_double(L.v2) << ',' << format_double(dv2) << ','
           << format_double(bound) << ',' << (checked ? 1 : 0) << ',' << (violated[k] ? 1 : 0) << '\n';
    }
}

inline void write_metrics_csv(std::ostream& os, const ScenarioResult& res, const ScenarioConfig& cfg) {
    const auto& m = res.metrics;
    os << "metric,value\n";
    os << "controller," << (cfg.controller == ControllerKind::adaptive ? "adaptive" : "pd") << '\n';
    os << "horizon," << format_double(cfg.horizon) << '\n';
    os << "tail_window," << format_double(m.tail_window) << '\n';
    os << "rms_tail_1," << format_double(m.rms_tail[0]) << '\n';
    os << "rms_tail_2," << format_double(m.rms_tail[1]) << '\n';
    os << "max_abs_tail_1," << format_double(m.max_abs_tail[0]) << '\n';
    os << "max_abs_tail_2," << format_double(m.max_abs_tail[1]) << '\n';
    os << "t_conv," << format_double(m.t_conv) << '\n';
    os << "t_conv_1," << format_double(m.t_conv_joint[0]) << '\n';
    os << "t_conv_2," << format_double(m.t_conv_joint[1]) << '\n';
    os << "max_v0," << format_double(m.max_v0) << '\n';
    os << "converged," << (m.converged ? 1 : 0) << '\n';
    if (cfg.lyapunov.enabled) {
        os << "lyapunov_checked," << res.decrease.checked << '\n';
        os << "lyapunov_violations," << res.decrease.violations << '\n';
        os << "lyapunov_violation_fraction," << format_double(res.decrease.fraction()) << '\n';
        os << "lyapunov_worst_excess," << format_double(res.decrease.worst_excess) << '\n';
    }
}

/// Writes trajectory_<name>.csv, metrics_<name>.csv and lyapunov_<name>.csv.
inline void write_outputs(const ScenarioResult& res, const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& stem) {
        std::ofstream f(dir / (stem + "_" + res.name + ".csv"));
        if (!f) throw std::runtime_error("cannot write " + (dir / (stem + "_" + res.name + ".csv")).string());
        return f;
    };
    {
        auto f = open("trajectory");
        write_trajectory_csv(f, res.records);
    }
    {
        auto f = open("metrics");
        write_metrics_csv(f, res, cfg);
    }
    if (cfg.lyapunov.enabled) {
        auto f = open("lyapunov");
        write_lyapunov_csv(f, res, cfg);
    }
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCase {
    std::string name;
    ControllerKind controller = ControllerKind::adaptive;
    std::optional<robot::Vec2> lambda;
};

/// "10,5;5,2.5;pd" -> adaptive with lambda (10,5), adaptive with (5,2.5), PD.
/// Entries are `pd`, `adaptive` (base lambda) or `<lambda1>,<lambda2>`.
inline std::vector<SweepCase> parse_cases(std::string_view spec) {
    std::vector<SweepCase> cases;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto next = spec.find(';', pos);
        const auto item = detail::trim(spec.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (!item.empty()) {
            SweepCase c;
            c.name = "case" + std::to_string(cases.size() + 1);
            if (item == "pd") {
                c.controller = ControllerKind::pd;
            } else if (item != "adaptive") {
                const auto parts = detail::split_values(item);
                if (parts.size() != 2) throw ConfigError("sweep case '" + std::string(item) + "': expected l1,l2");
                c.lambda = robot::Vec2(detail::parse_double(parts[0], "case"), detail::parse_double(parts[1], "case"));
            }
            cases.push_back(std::move(c));
        }
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return cases;
}

struct SweepRow {
    SweepCase spec;
    ScenarioConfig config;
    std::optional<ScenarioResult> result;
    std::string error;
};

/// Runs every case on its own task; a failing case leaves the others intact.
inline std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::vector<SweepCase>& cases) {
    if (cases.size() < 2) throw std::invalid_argument("sweep: need at least two cases");
    std::vector<SweepRow> rows;
    for (const auto& c : cases) {
        SweepRow row{c, base, std::nullopt, {}};
        row.config.name = c.name;
        row.config.controller = c.controller;
        if (c.lambda) row.config.adaptive.lambda = *c.lambda;
        rows.push_back(std::move(row));
    }
    std::vector<std::future<void>> jobs;
    for (auto& row : rows) {
        jobs.push_back(std::async(std::launch::async, [&row] {
            try {
                row.result = run_scenario(row.config);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }));
    }
    for (auto& j : jobs) j.get();
    return rows;
}

inline void write_sweep_summary(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "case,controller,lambda1,lambda2,rms_tail_1,rms_tail_2,max_abs_tail_1,max_abs_tail_2,t_conv,t_conv_1,"
          "t_conv_2,max_v0,converged,lyapunov_violation_fraction,status\n";
    for (const auto& row : rows) {
        const auto& c = row.config;
        os << row.spec.name << ',' << (c.controller == ControllerKind::adaptive ? "adaptive" : "pd") << ','
           << format_double(c.adaptive.lambda[0]) << ',' << format_double(c.adaptive.lambda[1]) << ',';
        if (row.result) {
            const auto& m = row.result->metrics;
            os << format_double(m.rms_tail[0]) << ',' << format_double(m.rms_tail[1]) << ','
               << format_double(m.max_abs_tail[0]) << ',' << format_double(m.max_abs_tail[1]) << ','
               << format_double(m.t_conv) << ',' << format_double(m.t_conv_joint[0]) << ','
               << format_double(m.t_conv_joint[1]) << ',' << format_double(m.max_v0) << ',' << (m.converged ? 1 : 0)
               << ',' << format_double(row.result->decrease.fraction()) << ",ok\n";
        } else {
            std::string msg = row.error;
            for (auto& ch : msg)
                if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
            os << ",,,,,,,,,,\"error: " << msg << "\"\n";
        }
    }
}

}  // namespace dzctl
