// Acceptance checks: one line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include "casimir/analysis.hpp"
#include "casimir/output.hpp"
#include "casimir/physics.hpp"
#include "casimir/scenario.hpp"

using namespace casimir;
namespace fs = std::filesystem;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const double inf = std::numeric_limits<double>::infinity();

int workers() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Report {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

std::string fmt(double v, const char* f = "%.6g") {
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

// mean envelope over the final `span` seconds
double tail_envelope(const TimeSeries& ts, double span) {
    const auto env = amplitude_envelope(ts);
    double sum = 0.0;
    int n = 0;
    for (const auto& e : env)
        if (e.time >= ts.t.back() - span) {
            sum += e.peak;
            ++n;
        }
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

void c1(Report& r) {
    const SphereParams sp = SphereParams::defaults();
    const double f_oracle = softened_frequency(static_equilibrium(100e-9, sp), sp);
    r.check(std::abs(f_oracle - 849.0) <= 5.0, "quasistatic f0C " + fmt(f_oracle) + " Hz");

    const TimeSeries ts = run(SimConfig{});
    r.check(!ts.pulled_in(), "nominal run stays clear of pull-in");
    const double f = tail_frequency(ts);
    r.check(f >= 800.0 && f <= 900.0, "closed-loop f0C " + fmt(f) + " Hz");
}

void c2(Report& r) {
    SimConfig c = builtin_scenario("fig5a").base;
    c.coupling.rest_separation = 10e-6;
    const SweepResult b = bode_sweep(c, 998.0, 1002.0, 41, workers());
    const ResonancePeak pk = resonance_peak(b);
    r.check(std::abs(pk.frequency - 1000.0) <= 0.5, "peak " + fmt(pk.frequency, "%.4f") + " Hz");
    r.check(std::abs(pk.quality - 1000.0) <= 50.0, "Q " + fmt(pk.quality, "%.1f"));
}

void c3(Report& r) {
    SimConfig c;
    c.magnet.time_delay = 0.0;
    const TimeSeries t0 = run(c);
    r.check(t0.pulled_in() && t0.pull_in_time() < 2.0,
            "tau2f=0 pull-in at " + (t0.pulled_in() ? fmt(t0.pull_in_time(), "%.4f") + " s" : "never"));

    c.magnet.time_delay = 750e-6;
    const TimeSeries t750 = run(c);
    double worst = 0.0;
    for (const auto& e : amplitude_envelope(t750)) worst = std::max(worst, e.peak);
    const double e750 = tail_envelope(t750, 0.5);
    r.check(!t750.pulled_in() && worst < c.coupling.rest_separation,
            "tau2f=750us no pull-in, envelope " + fmt(e750 * 1e9, "%.3f") + " nm, max " + fmt(worst * 1e9, "%.3f") + " nm");

    c.magnet.time_delay = 150e-6;
    const TimeSeries t150 = run(c);
    const double e150 = tail_envelope(t150, 0.5);
    r.check(!t150.pulled_in() && e150 < e750, "tau2f=150us envelope " + fmt(e150 * 1e9, "%.3f") + " nm");
}

void c4(Report& r) {
    const ScenarioSpec s = builtin_scenario("fig5c");
    std::vector<double> taus;
    for (int i = 0; i * 25 <= 1400; ++i) taus.push_back(i * 25e-6);
    const SweepResult on = delay_sweep(s.base, taus, s.read_time, workers());
    std::vector<double> a;
    for (const auto& p : on.points) a.push_back(p.pull_in ? inf : p.summary);

    r.check(on.points.front().pull_in, "tau2f=0 pull-in flagged");

    // local minimum of the finite profile in [50, 250] us, nearest 150
    double min_at = -1;
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
        const double us = taus[i] * 1e6;
        if (us >= 50 - 1e-6 && us <= 250 + 1e-6 && std::isfinite(a[i]) && a[i] < a[i - 1] && a[i] < a[i + 1]) {
            if (min_at < 0 || std::abs(us - 150) < std::abs(min_at - 150)) min_at = us;
        }
    }
    r.check(min_at >= 0, "local min at " + fmt(min_at) + " us");

    // local maximum in [1000, 1400] us; pull-in counts as unbounded amplitude, plateaus allowed
    double max_lo = -1, max_hi = -1;
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
        std::size_t j = i;
        while (j + 1 < a.size() && a[j + 1] == a[i]) ++j;
        if (j + 1 < a.size() && a[i] > a[i - 1] && a[i] > a[j + 1]) {
            const double lo = taus[i] * 1e6, hi = taus[j] * 1e6;
            if (hi >= 1000 - 1e-6 && lo <= 1400 + 1e-6) {
                max_lo = lo;
                max_hi = hi;
                break;
            }
        }
        i = j;
    }
    r.check(max_lo >= 0, "local max over " + fmt(max_lo) + "-" + fmt(max_hi) + " us");

    SimConfig off = s.base;
    off.magnet.pump_amplitude = 0.0;
    const SweepResult r0 = delay_sweep(off, taus, s.read_time, workers());
    const auto v = r0.summaries();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double flat = (*hi - *lo) / *hi;
    r.check(flat <= 1e-9 && std::isfinite(flat), "pump-off flatness " + fmt(flat));
}

void c5(Report& r) {
    const ScenarioSpec s = builtin_scenario("fig6");
    const GradientResponse g = gradient_response(s.base, s.window, s.analysis_start);
    r.check(std::abs(g.dominant_frequency - 1.0) <= 0.05, "dominant " + fmt(g.dominant_frequency, "%.4f") + " Hz");
    r.check(g.peak_to_peak >= 2.0 && g.peak_to_peak <= 8.0, "p-p " + fmt(g.peak_to_peak, "%.3f") + " Hz");
    r.check(g.steady_time > 0.0 && g.steady_time <= 0.3, "steady at " + fmt(g.steady_time, "%.3f") + " s");

    SimConfig null = s.base;
    null.gradient_signal.kind = GradientSignal::Kind::none;
    null.gradient_signal.amplitude_pp = 0.0;
    const GradientResponse z = gradient_response(null, s.window, s.analysis_start);
    r.check(z.peak_to_peak < 0.1, "null p-p " + fmt(z.peak_to_peak, "%.3g") + " Hz");
}

void c6(Report& r) {
    const ScenarioSpec s = builtin_scenario("fig7");
    r.check(std::abs((s.s_hi - s.s_lo) - 3e-9) < 1e-15 && s.base.magnet.pump_amplitude == 1e-9 &&
                s.base.magnet.time_delay == 750e-6,
            "3 nm window, A_M 1 nm, tau2f 750 us");
    std::vector<double> s0;
    for (int i = 0; i < s.points; ++i) s0.push_back(s.s_lo + (s.s_hi - s.s_lo) * i / (s.points - 1));
    const SweepResult sw = separation_sweep(s.base, s0, workers());
    std::vector<double> x, y;
    for (const auto& p : sw.points)
        if (!p.pull_in && std::isfinite(p.summary)) {
            x.push_back(p.mean_gap);
            y.push_back(p.summary);
        }
    r.check(x.size() == sw.points.size(), "no pull-in points");
    if (x.size() < 6) {
        r.check(false, "too few points to fit");
        return;
    }
    const FitResult f = fit_inverse_power(x, y);
    r.check(std::abs(f.c - 2.6) <= 0.6, "fit c " + fmt(f.c, "%.3f"));
    double s_max = 0.0;
    for (const auto& q : sensitivity(sw, s.base.magnet.spring_k, s.base.magnet.moment, s.base.magnet.field_angle))
        s_max = std::max(s_max, q.S_freq);
    r.check(s_max >= 2.0 && s_max <= 18.0, "max S " + fmt(s_max, "%.3f") + " Hz/(pT/cm)");
}

void c7(Report& r) {
    const double v = best_case_resolution(6.0, 10.0, 1.0);
    r.check(std::abs(v - 1.67) < 0.005, "resolution " + fmt(v, "%.4f") + " aT/cm");
    r.check(rel(v, 1.6) <= 0.10, "within 10% of 1.6 aT/cm");
}

void c8(Report& r) {
    const SphereParams sp = SphereParams::defaults();
    const double R = sp.radius;

    double fd = 0.0, kp = 0.0, sc = 0.0;
    for (double g = 20e-9; g < 5e-6; g *= 1.21) {
        const double h = 1e-5 * g;
        const double d = (casimir_potential(g + h, R) - casimir_potential(g - h, R)) / (2 * h);
        fd = std::max(fd, rel(-d, casimir_force(g, R)));
        kp = std::max(kp, rel(parametric_stiffness(g, R) * g, 3.0 * std::abs(casimir_force(g, R))));
        sc = std::max(sc, rel(casimir_force(2 * g, R) * 8.0, casimir_force(g, R)));
        sc = std::max(sc, rel(parametric_stiffness(2 * g, R) * 16.0, parametric_stiffness(g, R)));
        sc = std::max(sc, rel(casimir_potential(2 * g, R) * 4.0, casimir_potential(g, R)));
    }
    r.check(fd < 1e-6, "finite difference " + fmt(fd, "%.2e"));
    r.check(kp < 1e-12, "k_p g = 3|F| " + fmt(kp, "%.2e"));
    r.check(sc < 1e-12, "scaling " + fmt(sc, "%.2e"));

    {
        SimConfig c;
        c.sphere.quality = inf;
        c.coupling.rest_separation = 200e-9;
        c.magnet.pump_amplitude = 0.0;
        c.approach.duration = 0.0;
        c.drive_mode = DriveMode::constant_gain;
        c.controller.constant_gain = 0.0;
        c.controller.lock = false;
        const double s0 = c.coupling.rest_separation;
        const double x_eq = static_equilibrium(s0, c.sphere) - s0;
        auto pot = [&](double x) { return 0.5 * c.sphere.spring_k * x * x + casimir_potential(s0 + x, R); };
        SimState s;
        s.controller = initial_controller(c, 0.0);
        s.x_S = x_eq + 2e-9;
        s.x_M = magnet_position(0.0, s.controller, c);
        s.x_SM = s0 + s.x_S - s.x_M;
        auto energy = [&](const SimState& st) { return 0.5 * c.sphere.mass * st.v_S * st.v_S + pot(st.x_S) - pot(x_eq); };
        const double e0 = energy(s);
        double drift = 0.0;
        const int steps = static_cast<int>(std::llround(100e-3 / c.dt));
        for (int i = 0; i < steps; ++i) {
            s = step(s, c).state;
            drift = std::max(drift, std::abs(energy(s) - e0) / e0);
        }
        r.check(drift < 1e-8, "energy drift " + fmt(drift, "%.2e"));
    }
    {
        SimConfig c;
        c.sphere.radius = 0.0;
        c.magnet.pump_amplitude = 0.0;
        c.approach.duration = 0.0;
        c.drive_mode = DriveMode::constant_gain;
        c.controller.constant_gain = 0.0;
        c.controller.lock = false;
        c.duration = 1.0;
        const TimeSeries ts = run(c);
        const double f0 = c.sphere.natural_freq / two_pi, Q = c.sphere.quality;
        const double a0 = ts.x_S.front();
        double worst = 0.0;
        for (const auto& e : amplitude_envelope(ts))
            worst = std::max(worst, rel(e.peak, a0 * std::exp(-std::numbers::pi * f0 * e.time / Q)));
        r.check(worst < 0.01, "ringdown " + fmt(worst, "%.2e"));
    }
    {
        SimConfig c;
        c.duration = 1.0;
        const double fa = tail_frequency(run(c));
        c.dt /= 2;
        c.record_decimation *= 2;
        const double fb = tail_frequency(run(c));
        r.check(rel(fb, fa) < 1e-4, "dt halving " + fmt(rel(fb, fa), "%.2e"));
    }
    {
        std::vector<double> x, y;
        for (int i = 0; i < 13; ++i) {
            x.push_back(100e-9 + 0.25e-9 * i);
            y.push_back(-2.0 * std::pow(40e-9 / (x.back() - 60e-9), 2.6) + 850.0);
        }
        const FitResult f = fit_inverse_power(x, y);
        r.check(rel(f.c, 2.6) < 1e-3, "fit round trip c " + fmt(f.c, "%.6f"));
    }
}

void c9(Report& r) {
    const fs::path root = fs::temp_directory_path() / "casimir_acceptance_determinism";
    fs::remove_all(root);
    ScenarioSpec td = builtin_scenario("fig5b");
    td.base.duration = 0.5;
    ScenarioSpec sep = builtin_scenario("fig7");
    sep.base.duration = 0.3;
    for (const ScenarioSpec& s : {td, sep, builtin_scenario("fig3")}) {
        const auto a = run_scenario(s, {(root / s.name / "a").string(), workers(), true});
        const auto b = run_scenario(s, {(root / s.name / "b").string(), 1, true});
        std::size_t compared = 0, same = 0;
        for (const auto& e : fs::directory_iterator(root / s.name / "a")) {
            const auto name = e.path().filename().string();
            if (name == "manifest.json") continue;  // carries wall-clock time
            ++compared;
            if (fs::exists(root / s.name / "b" / name) &&
                read_file(e.path().string()) == read_file((root / s.name / "b" / name).string()))
                ++same;
        }
        r.check(compared > 0 && same == compared && a.files.size() == b.files.size(),
                s.name + " " + std::to_string(same) + "/" + std::to_string(compared) + " files identical");
    }
    fs::remove_all(root);
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<void(Report&)>>> all{
        {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9}};
    int failed = 0;
    for (const auto& [id, fn] : all) {
        Report r;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(r);
        } catch (const std::exception& e) {
            r.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s  %s  (%.1f s)\n", id, r.pass ? "PASS" : "FAIL", r.detail.str().c_str(), secs);
        std::fflush(stdout);
        if (!r.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
