#include "casimir/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "casimir/analysis.hpp"
#include "casimir/output.hpp"

namespace casimir {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Writer {
public:
    Writer(std::string dir, RunManifest& m, bool plots) : dir_(std::move(dir)), m_(m), plots_(plots) {}

    void add(const std::string& name, const std::string& content) {
        write_file((fs::path(dir_) / name).string(), content);
        m_.files.push_back({name, sha256_hex(content), content.size()});
    }
    void csv(const std::string& name, const std::vector<Column>& cols) { add(name, format_csv(cols)); }
    void json_file(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
    void plot(const std::string& name, const PlotSpec& p) {
        if (plots_) add(name, emit_plot(p));
    }

private:
    std::string dir_;
    RunManifest& m_;
    bool plots_;
};

std::string tau_label(double tau) { return "tau" + std::to_string(std::llround(tau * 1e6)) + "us"; }

std::vector<double> stride(const std::vector<double>& v, std::size_t k) {
    std::vector<double> o;
    for (std::size_t i = 0; i < v.size(); i += k) o.push_back(v[i]);
    return o;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

json events_json(const TimeSeries& ts) {
    json a = json::array();
    for (const auto& e : ts.events) a.push_back({{"time", e.time}, {"kind", to_string(e.kind)}, {"value", e.value}});
    return a;
}

double steady_time(const TimeSeries& ts) {
    for (const auto& e : ts.events)
        if (e.kind == EventKind::SteadyState) return e.time;
    return nan;
}

Outcome run_timedomain(const ScenarioSpec& spec, const RunOptions& opt, Writer& w) {
    std::vector<std::pair<std::string, SimConfig>> runs;
    if (spec.delays.empty()) {
        runs.emplace_back("base", spec.base);
    } else {
        for (double tau : spec.delays) {
            SimConfig c = spec.base;
            c.magnet.time_delay = tau;
            runs.emplace_back(tau_label(tau), c);
        }
    }
    std::vector<TimeSeries> out(runs.size());
    parallel_for(runs.size(), opt.workers, [&](std::size_t i) { out[i] = run(runs[i].second); });

    Outcome oc = Outcome::success;
    json summary = json::array();
    PlotSpec env{"sphere amplitude", "time (s)", "amplitude (m)", true, {}, {}};
    const auto k = static_cast<std::size_t>(spec.csv_stride);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& ts = out[i];
        const std::string& label = runs[i].first;
        if (ts.pulled_in()) oc = Outcome::pull_in;
        w.csv("timeseries_" + label + ".csv",
              {{"t(s)", stride(ts.t, k)}, {"x_S(m)", stride(ts.x_S, k)}, {"x_M(m)", stride(ts.x_M, k)},
               {"x_SM(m)", stride(ts.x_SM, k)}, {"drive_S(N)", stride(ts.drive_S, k)},
               {"f_hat(Hz)", stride(ts.f_hat, k)}});
        PlotSeries s{label, {}, {}};
        for (const auto& c : ts.cycles) {
            s.x.push_back(c.time);
            s.y.push_back(c.envelope);
        }
        if (s.x.size() >= 2) env.series.push_back(s);
        if (ts.pulled_in()) env.markers.push_back({ts.pull_in_time(), label + " pull-in"});
        const std::size_t pk = std::max<std::size_t>(1, ts.size() / 4000);
        w.plot("trace_" + label + ".svg",
               {"x_S " + label, "time (s)", "x_S (m)", false, {{"x_S", stride(ts.t, pk), stride(ts.x_S, pk)}}, {}});
        summary.push_back({{"run", label},
                           {"tau2f_s", runs[i].second.magnet.time_delay},
                           {"pull_in", ts.pulled_in()},
                           {"pull_in_time_s", num(ts.pulled_in() ? ts.pull_in_time() : nan)},
                           {"steady_time_s", num(steady_time(ts))},
                           {"final_envelope_m", num(ts.cycles.empty() ? nan : ts.cycles.back().envelope)},
                           {"f0C_tail_Hz", num(tail_frequency(ts))},
                           {"events", events_json(ts)}});
    }
    if (!env.series.empty()) w.plot("envelope.svg", env);
    w.json_file("summary.json", {{"experiment", "timedomain"}, {"runs", summary}});
    return oc;
}

Outcome run_bode(const ScenarioSpec& spec, const RunOptions& opt, Writer& w) {
    std::vector<double> seps = spec.separations;
    if (seps.empty()) seps.push_back(spec.base.coupling.rest_separation);
    std::vector<double> sep_col, f, db, ph, pin;
    json summary = json::array();
    PlotSpec pl{"Bode magnitude", "drive frequency (Hz)", "amplitude / static deflection (dB)", false, {}, {}};
    for (double s0 : seps) {
        SimConfig c = spec.base;
        c.coupling.rest_separation = s0;
        const SweepResult r = bode_sweep(c, spec.f_lo, spec.f_hi, spec.points, opt.workers, spec.settle);
        PlotSeries ser{"s0=" + format_number(s0) + " m", {}, {}};
        for (const auto& p : r.points) {
            sep_col.push_back(s0);
            f.push_back(p.swept);
            db.push_back(p.summary);
            ph.push_back(p.phase);
            pin.push_back(p.pull_in ? 1.0 : 0.0);
            ser.x.push_back(p.swept);
            ser.y.push_back(p.summary);
            if (p.pull_in) pl.markers.push_back({p.swept, "pull-in"});
        }
        pl.series.push_back(ser);
        const ResonancePeak pk = resonance_peak(r);
        summary.push_back({{"s0_m", s0}, {"peak_Hz", num(pk.frequency)}, {"quality", num(pk.quality)},
                           {"peak_dB", num(pk.peak_db)}});
    }
    w.csv("bode.csv", {{"s0(m)", sep_col}, {"frequency(Hz)", f}, {"amplitude(dB)", db}, {"phase(rad)", ph},
                       {"pull_in(flag)", pin}});
    w.plot("bode.svg", pl);
    w.json_file("summary.json", {{"experiment", "bode"}, {"sweeps", summary}});
    return Outcome::success;
}

// Pull-in is an expected outcome of individual sweep points, so sweeps report success.
Outcome run_delay(const ScenarioSpec& spec, const RunOptions& opt, Writer& w) {
    std::vector<double> taus;
    const auto n = static_cast<long>(std::floor((spec.tau_hi - spec.tau_lo) / spec.tau_step + 1e-9));
    for (long i = 0; i <= n; ++i) taus.push_back(spec.tau_lo + spec.tau_step * static_cast<double>(i));
    const SweepResult r = delay_sweep(spec.base, taus, spec.read_time, opt.workers);

    std::vector<Column> cols{{"tau2f(s)", {}}, {"amplitude(m)", {}}, {"pull_in(flag)", {}}, {"pull_in_time(s)", {}}};
    PlotSpec pl{"amplitude at read time", "tau2f (s)", "amplitude (m)", true, {}, {}};
    PlotSeries ser{"pump on", {}, {}};
    json pts = json::array();
    for (const auto& p : r.points) {
        cols[0].values.push_back(p.swept);
        cols[1].values.push_back(p.summary);
        cols[2].values.push_back(p.pull_in ? 1.0 : 0.0);
        cols[3].values.push_back(p.pull_in ? p.pull_in_time : nan);
        ser.x.push_back(p.swept);
        ser.y.push_back(p.summary);
        if (p.pull_in) pl.markers.push_back({p.swept, "pull-in"});
        pts.push_back({{"tau2f_s", p.swept}, {"amplitude_m", num(p.summary)}, {"pull_in", p.pull_in}});
    }
    pl.series.push_back(ser);
    json j{{"experiment", "delay_sweep"}, {"read_time_s", spec.read_time}, {"points", pts}};
    if (spec.pump_off_reference) {
        SimConfig off = spec.base;
        off.magnet.pump_amplitude = 0.0;
        const SweepResult r0 = delay_sweep(off, taus, spec.read_time, opt.workers);
        Column c{"amplitude_pump_off(m)", r0.summaries()};
        cols.push_back(c);
        pl.series.push_back({"pump off", taus, c.values});
        const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
        j["pump_off_flatness"] = num((*hi - *lo) / *hi);
    }
    w.csv("delay_sweep.csv", cols);
    w.plot("delay_sweep.svg", pl);
    w.json_file("summary.json", j);
    return Outcome::success;
}

json fit_json(const FitResult& f) {
    return {{"a", num(f.a)}, {"b", num(f.b)}, {"c", num(f.c)}, {"d", num(f.d)},
            {"rms_residual", num(f.rms_residual)}, {"converged", f.converged}, {"iterations", f.iterations}};
}

Outcome run_separation(const ScenarioSpec& spec, const RunOptions& opt, Writer& w) {
    const auto s = linspace(spec.s_lo, spec.s_hi, spec.points);
    const SweepResult r = separation_sweep(spec.base, s, opt.workers);
    std::vector<double> gap, f, df, xs, ys;
    const double f_ref = r.points.back().summary;
    for (const auto& p : r.points) {
        gap.push_back(p.mean_gap);
        f.push_back(p.summary);
        df.push_back(p.summary - f_ref);
        if (!p.pull_in && std::isfinite(p.summary)) {
            xs.push_back(p.mean_gap);
            ys.push_back(p.summary);
        }
    }
    const auto sens = sensitivity(r, spec.base.magnet.spring_k, spec.base.magnet.moment, spec.base.magnet.field_angle);
    std::vector<double> smid, sval, sstep;
    double s_max = nan;
    for (const auto& q : sens) {
        smid.push_back(q.at_separation);
        sval.push_back(q.S_freq);
        sstep.push_back(q.equivalent_gradient_step);
        if (std::isfinite(q.S_freq) && !(q.S_freq <= s_max)) s_max = q.S_freq;
    }
    // per-point sensitivity column: slope to the next point, last row repeats the final pair
    std::vector<double> s_col = sval;
    s_col.push_back(sval.empty() ? nan : sval.back());
    w.csv("separation_sweep.csv", {{"s0(m)", s}, {"mean_x_SM(m)", gap}, {"f0C(Hz)", f}, {"delta_f0C(Hz)", df},
                                   {"S_freq(Hz/(pT/cm))", s_col}});
    w.csv("sensitivity.csv", {{"s0_mid(m)", smid}, {"S_freq(Hz/(pT/cm))", sval}, {"gradient_step(pT/cm)", sstep}});

    json j{{"experiment", "separation_sweep"}, {"max_S_freq_Hz_per_pT_cm", num(s_max)}};
    PlotSpec pl{"coupled frequency vs separation", "mean x_SM (m)", "delta f0C (Hz)", false, {}, {}};
    pl.series.push_back({"simulated", gap, df});
    if (xs.size() >= 6) {
        const FitResult fr = fit_inverse_power(xs, ys);
        w.json_file("fit.json", fit_json(fr));
        j["fit"] = fit_json(fr);
        std::vector<double> yfit;
        for (double x : gap) yfit.push_back(fr(x) - f_ref);
        pl.series.push_back({"a/(x-b)^c + d", gap, yfit});
    }
    if (std::isfinite(s_max))
        j["resolution_aT_per_cm"] = {{"ref_1Hz", best_case_resolution(s_max, spec.counter_ppm, 1.0)},
                                     {"ref_f0C", best_case_resolution(s_max, spec.counter_ppm, f_ref)}};
    w.plot("separation_sweep.svg", pl);
    w.json_file("summary.json", j);
    return Outcome::success;
}

Outcome run_gradient(const ScenarioSpec& spec, const RunOptions& opt, Writer& w) {
    std::vector<std::pair<std::string, SimConfig>> cases{{"signal", spec.base}};
    if (spec.compare_null) {
        SimConfig c = spec.base;
        c.gradient_signal.kind = GradientSignal::Kind::none;
        c.gradient_signal.amplitude_pp = 0.0;
        cases.emplace_back("null", c);
    }
    std::vector<GradientResponse> res(cases.size());
    std::vector<std::string> err(cases.size());
    parallel_for(cases.size(), opt.workers, [&](std::size_t i) {
        try {
            res[i] = gradient_response(cases[i].second, spec.window, spec.analysis_start);
        } catch (const PullInError& e) {
            err[i] = e.what();
        }
    });
    json j{{"experiment", "gradient_response"}};
    PlotSpec pl{"coupled frequency track", "time (s)", "f0C (Hz)", false, {}, {}};
    Outcome oc = Outcome::success;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& name = cases[i].first;
        if (!err[i].empty()) {
            oc = Outcome::pull_in;
            j[name] = {{"error", err[i]}};
            continue;
        }
        const auto& g = res[i];
        w.csv("track_" + name + ".csv", {{"t(s)", g.track.times}, {"f0C(Hz)", g.track.f0C}});
        if (g.track.times.size() >= 2) pl.series.push_back({name, g.track.times, g.track.f0C});
        j[name] = {{"dominant_frequency_Hz", num(g.dominant_frequency)},
                   {"peak_to_peak_Hz", num(g.peak_to_peak)},
                   {"steady_time_s", num(g.steady_time)},
                   {"windows", g.track.times.size()}};
    }
    if (!pl.series.empty()) w.plot("track.svg", pl);
    w.json_file("summary.json", j);
    return oc;
}

Outcome run_fit(const ScenarioSpec& spec, const RunOptions&, Writer& w) {
    std::istringstream in(read_file(spec.data_file));
    std::string line;
    std::vector<double> x, y;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (ls >> a >> b) {
            x.push_back(a);
            y.push_back(b);
        }
    }
    const FitResult fr = fit_inverse_power(x, y);
    std::vector<double> yf;
    for (double v : x) yf.push_back(fr(v));
    w.csv("fit.csv", {{"x", x}, {"y", y}, {"y_fit", yf}});
    w.json_file("fit.json", fit_json(fr));
    w.plot("fit.svg", {"inverse power fit", "x", "y", false, {{"data", x, y}, {"fit", x, yf}}, {}});
    return Outcome::success;
}

Outcome run_resolution(const ScenarioSpec& spec, const RunOptions&, Writer& w) {
    std::vector<double> res;
    json a = json::array();
    for (double f : spec.ref_freqs) {
        res.push_back(best_case_resolution(spec.s_freq, spec.counter_ppm, f));
        a.push_back({{"ref_freq_Hz", f}, {"resolution_aT_per_cm", res.back()}});
    }
    w.csv("resolution.csv", {{"ref_freq(Hz)", spec.ref_freqs}, {"resolution(aT/cm)", res}});
    w.json_file("summary.json", {{"experiment", "resolution"}, {"S_freq", spec.s_freq},
                                 {"counter_ppm", spec.counter_ppm}, {"results", a}});
    return Outcome::success;
}

Outcome run_potential(const ScenarioSpec& spec, const RunOptions&, Writer& w) {
    const auto x = linspace(spec.s_lo, spec.s_hi, spec.points);
    const auto& sp = spec.base.sphere;
    std::vector<double> cav = spec.cavities;
    if (cav.empty()) cav.push_back(spec.base.coupling.rest_separation);
    std::vector<Column> cols{{"x_S(m)", x}};
    PlotSpec pl{"total potential", "x_S (m)", "U (J)", false, {}, {}};
    json curves = json::array();
    const auto crit = critical_separation(sp);
    for (double s : cav) {
        std::vector<double> u(x.size(), nan);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (s - x[i] > spec.base.coupling.min_gap) u[i] = total_potential_curve({x[i]}, s, sp)[0];
        // stationary points from sign changes of the discrete slope
        json stat = json::array();
        for (std::size_t i = 1; i + 1 < x.size(); ++i) {
            if (!std::isfinite(u[i - 1]) || !std::isfinite(u[i + 1])) continue;
            const double d0 = u[i] - u[i - 1], d1 = u[i + 1] - u[i];
            if (d0 < 0 && d1 >= 0) stat.push_back({{"kind", "minimum"}, {"x_S_m", x[i]}});
            if (d0 > 0 && d1 <= 0) stat.push_back({{"kind", "maximum"}, {"x_S_m", x[i]}});
        }
        cols.push_back({"U_s" + format_number(s) + "(J)", u});
        pl.series.push_back({"s=" + format_number(s) + " m", x, u});
        curves.push_back({{"cavity_m", s}, {"stationary_points", stat}});
    }
    w.csv("potential.csv", cols);
    w.plot("potential.svg", pl);
    w.json_file("summary.json", {{"experiment", "potential_curve"},
                                 {"g_crit_m", crit.gap},
                                 {"s0_crit_m", crit.separation},
                                 {"curves", curves}});
    return Outcome::success;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"fig3", "fig5a", "fig5b", "fig5c", "fig6", "fig7"}; }

bool is_builtin(const std::string& name) {
    const auto v = builtin_names();
    return std::find(v.begin(), v.end(), name) != v.end();
}

ScenarioSpec builtin_scenario(const std::string& name) {
    ScenarioSpec s;
    s.name = name;
    if (name == "fig3") {
        s.experiment = Experiment::potential_curve;
        s.cavities = {100e-9, critical_separation(s.base.sphere).separation, 80e-9};
        s.s_lo = -40e-9;
        s.s_hi = 60e-9;
        s.points = 1001;
    } else if (name == "fig5a") {
        s.experiment = Experiment::bode;
        s.base.drive_mode = DriveMode::constant_gain;
        s.base.controller.constant_gain = 1e-4;
        s.base.magnet.pump_amplitude = 0.0;
        s.base.approach.duration = 0.0;
        s.separations = {10e-6, 100e-9};
        s.f_lo = 800.0;
        s.f_hi = 1050.0;
        s.points = 126;
    } else if (name == "fig5b") {
        s.experiment = Experiment::timedomain;
        s.delays = {0.0, 150e-6, 750e-6};
        s.base.duration = 2.0;
    } else if (name == "fig5c") {
        s.experiment = Experiment::delay_sweep;
        s.log_y = true;
    } else if (name == "fig6") {
        s.experiment = Experiment::gradient_response;
        s.base.gradient_signal = {GradientSignal::Kind::sine, 4e-10, 1.0, 0.0};
        s.base.duration = 2.0;
    } else if (name == "fig7") {
        s.experiment = Experiment::separation_sweep;
        s.base.magnet.pump_amplitude = 1e-9;
        s.base.duration = 0.6;
    } else {
        throw std::invalid_argument("unknown scenario '" + name + "'");
    }
    s.validate();
    return s;
}

RunManifest run_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest m;
    m.config_echo = print_config(spec);
    fs::create_directories(opts.output_dir);
    Writer w(opts.output_dir, m, opts.plots);
    w.add("config.txt", m.config_echo);

    switch (spec.experiment) {
        case Experiment::timedomain: m.outcome = run_timedomain(spec, opts, w); break;
        case Experiment::bode: m.outcome = run_bode(spec, opts, w); break;
        case Experiment::delay_sweep: m.outcome = run_delay(spec, opts, w); break;
        case Experiment::separation_sweep: m.outcome = run_separation(spec, opts, w); break;
        case Experiment::gradient_response: m.outcome = run_gradient(spec, opts, w); break;
        case Experiment::fit: m.outcome = run_fit(spec, opts, w); break;
        case Experiment::resolution: m.outcome = run_resolution(spec, opts, w); break;
        case Experiment::potential_curve: m.outcome = run_potential(spec, opts, w); break;
    }
    m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto& sp = spec.base.sphere;
    json files = json::array();
    for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    json man{{"tool", "sim"},
             {"version", m.version},
             {"scenario", spec.name},
             {"experiment", to_string(spec.experiment)},
             {"outcome", m.outcome == Outcome::success ? "success" : "pull_in"},
             {"config", m.config_echo},
             {"constants",
              {{"hbar_J_s", PhysicalConstants::hbar},
               {"c_m_per_s", PhysicalConstants::c_light},
               {"casimir_prefactor_J_m", casimir_prefactor},
               {"sphere_mass_kg", sp.mass},
               {"magnet_mass_kg", spec.base.magnet.mass},
               {"magnet_pump_force_stiffness", "k_m"}}},
             {"wall_clock_s", m.wall_clock},
             {"files", files}};
    write_file((fs::path(opts.output_dir) / "manifest.json").string(), man.dump(2) + "\n");
    return m;
}

}  // namespace casimir
