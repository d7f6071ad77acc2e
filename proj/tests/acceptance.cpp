// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dzctl/config.hpp"
#include "dzctl/simulation.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using dzctl::RobotLayout;
namespace rb = dzctl::robot;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string detail = out.detail;
    if (budget_s > 0.0 && elapsed >= budget_s) {
        out.pass = false;
        detail += "; runtime over budget";
    }
    if (!out.pass) ++failures;
    std::printf("%s %s  %s: %s [%.2f s%s]\n", id, out.pass ? "PASS" : "FAIL", title, detail.c_str(), elapsed,
                budget_s > 0.0 ? (", budget " + dzctl::format_double(budget_s) + " s").c_str() : "");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// --- AC1 -------------------------------------------------------------------

Outcome dead_zone_exactness() {
    const dzctl::ScenarioConfig cfg;
    double worst_residual = 0.0, worst_offset_ratio = 0.0;
    constexpr int n = 100000;
    for (const auto& ch : cfg.deadzones) {
        const double p_star = dzctl::xi_bound(ch);
        for (int k = 0; k <= n; ++k) {
            const double v = -10.0 + 20.0 * k / n;
            const auto d = dzctl::decompose(v, ch);
            worst_residual = std::max(worst_residual, std::abs(dzctl::dead_zone_output(v, ch) - d.reconstruct(v)));
            worst_offset_ratio = std::max(worst_offset_ratio, std::abs(d.offset) / p_star);
        }
    }
    return {worst_residual <= 1e-12 && worst_offset_ratio <= 1.0,
            fmt("max |u - (gain v + offset)| = %.3g (<= 1e-12), max |offset|/p* = %.4f (<= 1)", worst_residual,
                worst_offset_ratio)};
}

// --- AC2 -------------------------------------------------------------------

using Vec1 = Eigen::Matrix<double, 1, 1>;

struct NoControl {
    double compute(double, const Vec1&, const dzctl::HistoryBuffer<Vec1>&) { return 0.0; }
    void advance(double) {}
};

double decay_error(double h) {
    dzctl::RunSpec<Vec1> spec{0.0, 1.0, h, Vec1::Constant(1.0)};
    NoControl ctrl;
    double last = 0.0;
    dzctl::run(
        spec, ctrl, [](double, const Vec1& x, double, const dzctl::HistoryBuffer<Vec1>&) -> Vec1 { return -x; },
        [&](double, const Vec1& x, double) { last = x[0]; });
    return std::abs(last - std::exp(-1.0));
}

Outcome integrator_correctness() {
    const double e1 = decay_error(0.1), e2 = decay_error(0.05), e3 = decay_error(0.025);
    const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));

    dzctl::RunSpec<Vec1> spec{0.0, 2.0, 1e-3, Vec1::Constant(1.0)};
    NoControl ctrl;
    double worst = 0.0;
    dzctl::run(
        spec, ctrl,
        [](double t, const Vec1&, double, const dzctl::HistoryBuffer<Vec1>& hist) -> Vec1 {
            return -hist.sample(t - 1.0);
        },
        [&](double t, const Vec1& x, double) { worst = std::max(worst, std::abs(x[0] - dzctl::test::delayed_oracle(t))); });

    return {order >= 3.5 && worst <= 1e-6,
            fmt("empirical order = %.3f (>= 3.5), delayed test equation max error on [0,2] = %.3g (<= 1e-6)", order,
                worst)};
}

// --- AC3 -------------------------------------------------------------------

Outcome quadrature_vs_analytic() {
    const dzctl::ScenarioConfig cfg;
    const auto& p = cfg.adaptive;
    const dzctl::GaussLegendre quad(cfg.quadrature_order);
    const rb::Regressor reg;
    const auto b_diag = [&](int i, const rb::State& x) { return rb::inertia_diag(rb::positions(x), cfg.robot)(i, i); };
    dzctl::test::Rng rng(2024);
    double psi_err = 0.0, v1_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
        rb::State x;
        x << rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-5, 5), rng.uniform(-5, 5);
        const auto yd = cfg.trajectory.at(rng.uniform(0, 20));
        const auto e = dzctl::error_stack<RobotLayout>(x, yd);
        const auto S = dzctl::filtered_error<RobotLayout>(e, p.lambda);
        const auto v = dzctl::nu<RobotLayout>(e, yd, p.lambda);
        const auto z = dzctl::zeta<RobotLayout>(yd, e, p.lambda);

        const auto Psi = dzctl::psi<RobotLayout>(x, S, v, z, reg, quad);
        const double psi1 = 0.5 * (-std::sin(x[1]) * x[3]) * S[0] + (std::cos(x[1]) + 2.0) * v[0];
        const double psi2 = 0.5 * (0.5 * std::cos(x[0]) * x[2]) * S[1] + (1.0 + 0.5 * std::sin(x[0])) * v[1];
        psi_err = std::max({psi_err, std::abs(Psi(0, 0) - psi1), std::abs(Psi(1, 0) - psi2)});

        const double V1 = dzctl::v1<RobotLayout>(S, x, z, p.alpha, b_diag, quad);
        const auto Bd = rb::inertia_diag(rb::positions(x), cfg.robot);
        const double closed = 0.5 * (p.alpha[0] * Bd(0, 0) * S[0] * S[0] + p.alpha[1] * Bd(1, 1) * S[1] * S[1]);
        v1_err = std::max(v1_err, std::abs(V1 - closed));
    }
    return {psi_err <= 1e-10 && v1_err <= 1e-10,
            fmt("max |Psi - closed form| = %.3g, max |V1 - closed form| = %.3g over 1000 states (<= 1e-10)", psi_err,
                v1_err)};
}

// --- AC4 / AC5 ---------------------------------------------------------------

dzctl::ScenarioResult benchmark_run;

Outcome benchmark_scenario() {
    const dzctl::ScenarioConfig cfg;
    benchmark_run = dzctl::run_scenario(cfg);
    const double t_end = benchmark_run.records.back().t;
    double tail = 0.0, w_max = 0.0;
    for (const auto& r : benchmark_run.records) {
        if (r.t >= t_end - 5.0 - 1e-9) tail = std::max({tail, std::abs(r.e1), std::abs(r.e2)});
        w_max = std::max({w_max, std::abs(r.W1), std::abs(r.W2)});
    }
    return {tail < 0.05 && w_max < 100.0 && benchmark_run.records.size() == 20001,
            fmt("max_i |e_i| over final 5 s = %.4f rad (< 0.05), max |W_hat| = %.3f (< 100), %zu records", tail, w_max,
                benchmark_run.records.size())};
}

Outcome lyapunov_decrease() {
    const dzctl::ScenarioConfig cfg;
    const auto& rep = benchmark_run.decrease;
    const auto strict = dzctl::decrease_report<rb::Vec2>(benchmark_run.lyapunov, benchmark_run.S_series, cfg.adaptive.alpha,
                                                         cfg.adaptive.K1, cfg.adaptive.eps_s, cfg.lyapunov.tolerance,
                                                         dzctl::CheckRegion::every_channel);
    return {rep.checked > 0 && rep.fraction() < 0.05,
            fmt("%zu/%zu steps with ||S|| > eps_s violate the bound, fraction %.4f (< 0.05); "
                "with min_i |s_i| > eps_s instead: %zu/%zu (%.4f)",
                rep.violations, rep.checked, rep.fraction(), strict.violations, strict.checked, strict.fraction())};
}

// --- AC6 -------------------------------------------------------------------

Outcome baseline_separation() {
    dzctl::ScenarioConfig cfg;
    cfg.controller = dzctl::ControllerKind::pd;
    const auto pd = dzctl::run_scenario(cfg);
    const auto& a = benchmark_run.metrics.rms_tail;
    const auto& b = pd.metrics.rms_tail;
    const double r1 = b[0] / a[0], r2 = b[1] / a[1];
    return {r1 >= 3.0 && r2 >= 3.0,
            fmt("tail RMS adaptive = (%.4g, %.4g), PD = (%.4g, %.4g); ratios = (%.1f, %.1f) (>= 3)", a[0], a[1], b[0],
                b[1], r1, r2)};
}

// --- AC7 -------------------------------------------------------------------

Outcome lambda_sweep() {
    const auto rows = dzctl::sweep(dzctl::ScenarioConfig{}, dzctl::parse_cases("10,5;5,2.5;2.5,1.25"));
    std::vector<double> tc, v0;
    for (const auto& row : rows) {
        if (!row.result) return {false, row.spec.name + " failed: " + row.error};
        tc.push_back(row.result->metrics.t_conv);
        v0.push_back(row.result->metrics.max_v0);
    }
    const bool ok = tc[0] < tc[1] && tc[1] < tc[2] && v0[0] > v0[1] && v0[1] > v0[2];
    return {ok, fmt("t_conv = %.3f < %.3f < %.3f s, max ||V|| on [0,1 s] = %.1f > %.1f > %.1f", tc[0], tc[1], tc[2],
                    v0[0], v0[1], v0[2])};
}

// --- AC8 -------------------------------------------------------------------

Outcome determinism() {
    const dzctl::ScenarioConfig cfg;
    const auto root = std::filesystem::temp_directory_path() / "dzctl_acceptance";
    std::filesystem::remove_all(root);
    dzctl::write_outputs(benchmark_run, cfg, root / "a");
    dzctl::write_outputs(dzctl::run_scenario(cfg), cfg, root / "b");
    const std::string name = "trajectory_" + cfg.name + ".csv";
    const std::string a = file_bytes(root / "a" / name), b = file_bytes(root / "b" / name);
    std::filesystem::remove_all(root);
    return {!a.empty() && a == b, fmt("two runs wrote %zu and %zu bytes, %s", a.size(), b.size(),
                                      a == b ? "byte-identical" : "contents differ")};
}

}  // namespace

int main() {
    criterion("AC1", "dead-zone reformulation exactness", 1.0, dead_zone_exactness);
    criterion("AC2", "integrator correctness", 5.0, integrator_correctness);
    criterion("AC3", "quadrature vs analytic", 1.0, quadrature_vs_analytic);
    criterion("AC4", "benchmark scenario tracking", 10.0, benchmark_scenario);
    criterion("AC5", "Lyapunov decrease", 0.0, lyapunov_decrease);
    criterion("AC6", "baseline separation", 10.0, baseline_separation);
    criterion("AC7", "lambda-sweep monotonicity", 30.0, lambda_sweep);
    criterion("AC8", "determinism", 0.0, determinism);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
