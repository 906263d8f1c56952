#include "casimir/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace casimir {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

struct Derivs {
    double v_S, a_S, v_M, a_M;
    bool pull_in;
};

// Right-hand side of the coupled system at time t for a frozen controller.
Derivs rhs(double t, double x_S, double v_S, double x_M, double v_M, const ControllerState& c,
           const SimConfig& cfg) {
    const auto& sp = cfg.sphere;
    const auto& mp = cfg.magnet;
    Derivs d{v_S, 0.0, 0.0, 0.0, false};

    double xm;
    if (cfg.magnet_mode == MagnetMode::prescribed) {
        xm = magnet_position(t, c, cfg);
    } else {
        xm = x_M - cfg.approach.retraction(t);
        d.v_M = v_M;
    }
    double gap = cfg.coupling.rest_separation + x_S - xm;
    if (gap <= cfg.coupling.min_gap) {
        d.pull_in = true;
        gap = cfg.coupling.min_gap;
    }
    const double f_cas = sp.radius > 0 ? casimir_force(gap, sp.radius) : 0.0;
    const double damping = sp.mass * sp.natural_freq / sp.quality;
    d.a_S = (sphere_drive(t, c, cfg) + f_cas - damping * v_S - sp.spring_k * x_S) / sp.mass;

    if (cfg.magnet_mode == MagnetMode::full_ode) {
        const double ph = c.omega_hat * (t - c.anchor + mp.time_delay);
        const double drive = mp.spring_k * mp.pump_amplitude * std::sin(2.0 * ph + mp.pump_phase);
        const double f_mag = magnetic_force(mp.moment, cfg.gradient_signal.value(t),
                                            cfg.gradient_signal.angle);
        const double c_M = mp.mass * mp.natural_freq / mp.quality;
        // back-action on the magnet is equal and opposite to the sphere's
        d.a_M = (drive + f_mag - f_cas - c_M * v_M - mp.spring_k * x_M) / mp.mass;
    }
    return d;
}

double separation(const SimState& s, const SimConfig& cfg) {
    return cfg.coupling.rest_separation + s.x_S - s.x_M;
}

}  // namespace

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::PullIn: return "PullIn";
        case EventKind::SteadyState: return "SteadyState";
        case EventKind::ZeroCrossingSummary: return "ZeroCrossingSummary";
    }
    return "?";
}

double GradientSignal::value(double t) const {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::constant: return amplitude_pp;
        case Kind::sine: return 0.5 * amplitude_pp * std::sin(two_pi * frequency * t);
    }
    return 0.0;
}

void GradientSignal::validate() const {
    require(amplitude_pp >= 0 && frequency >= 0, "gradient: amplitude and frequency must be non-negative");
    require(kind != Kind::none || amplitude_pp == 0.0, "gradient: kind none with nonzero amplitude");
}

double ApproachSettings::retraction(double t) const {
    if (duration <= 0.0 || t >= duration) return 0.0;
    return offset * (1.0 - t / duration);
}

void SimConfig::validate() const {
    sphere.validate();
    magnet.validate();
    coupling.validate();
    gradient_signal.validate();
    require(dt > 0 && duration > 0, "sim: dt and duration must be positive");
    require(record_decimation >= 1, "sim: decimation must be >= 1");
    const double f_pump = 2.0 * sphere.natural_freq / two_pi;
    require(dt <= 1.0 / (200.0 * f_pump) * (1.0 + 1e-12), "sim: dt too coarse for the pump frequency");
    if (magnet_mode == MagnetMode::full_ode)
        require(magnet.mass > 0 && magnet.natural_freq > 0, "sim: full ODE magnet needs mass and omega0");
    require(controller.gain_cap > 0 && controller.initial_gain >= 0 && controller.constant_gain >= 0,
            "sim: bad controller gains");
    require(controller.hysteresis >= 0 && controller.refractory >= 0, "sim: bad crossing detector");
    require(approach.duration >= 0 && approach.offset >= 0, "sim: bad approach settings");
}

bool TimeSeries::pulled_in() const { return pull_in_time() >= 0.0; }

double TimeSeries::pull_in_time() const {
    for (const auto& e : events)
        if (e.kind == EventKind::PullIn) return e.time;
    return -1.0;
}

double magnet_position(double t, const ControllerState& c, const SimConfig& cfg) {
    const auto& mp = cfg.magnet;
    const double deflection =
        magnetic_force(mp.moment, cfg.gradient_signal.value(t), cfg.gradient_signal.angle) / mp.spring_k;
    return magnet_pump_displacement(t - c.anchor, c.omega_hat, deflection, mp) -
           cfg.approach.retraction(t);
}

double sphere_drive(double t, const ControllerState& c, const SimConfig& cfg) {
    const double gain =
        cfg.drive_mode == DriveMode::agc ? c.agc_gain : cfg.controller.constant_gain;
    return sphere_drive_force(t - c.anchor, c.omega_hat, gain, cfg.sphere);
}

double acceleration_sphere(const SimState& s, const SimConfig& cfg) {
    if (!(s.x_SM > 0.0)) throw PullInError("acceleration: non-positive separation");
    const auto& sp = cfg.sphere;
    const double f_cas = sp.radius > 0 ? casimir_force(s.x_SM, sp.radius) : 0.0;
    const double damping = sp.mass * sp.natural_freq / sp.quality;
    return (sphere_drive(s.t, s.controller, cfg) + f_cas - damping * s.v_S - sp.spring_k * s.x_S) /
           sp.mass;
}

StepResult step(const SimState& s, const SimConfig& cfg) {
    const double h = cfg.dt;
    const auto& c = s.controller;
    const bool ode = cfg.magnet_mode == MagnetMode::full_ode;
    // integrated magnet coordinate excludes the approach retraction
    const double xM0 = ode ? s.x_M + cfg.approach.retraction(s.t) : 0.0;

    const Derivs k1 = rhs(s.t, s.x_S, s.v_S, xM0, s.v_M, c, cfg);
    const Derivs k2 = rhs(s.t + 0.5 * h, s.x_S + 0.5 * h * k1.v_S, s.v_S + 0.5 * h * k1.a_S,
                          xM0 + 0.5 * h * k1.v_M, s.v_M + 0.5 * h * k1.a_M, c, cfg);
    const Derivs k3 = rhs(s.t + 0.5 * h, s.x_S + 0.5 * h * k2.v_S, s.v_S + 0.5 * h * k2.a_S,
                          xM0 + 0.5 * h * k2.v_M, s.v_M + 0.5 * h * k2.a_M, c, cfg);
    const Derivs k4 = rhs(s.t + h, s.x_S + h * k3.v_S, s.v_S + h * k3.a_S, xM0 + h * k3.v_M,
                          s.v_M + h * k3.a_M, c, cfg);

    StepResult r{s, k1.pull_in || k2.pull_in || k3.pull_in || k4.pull_in};
    SimState& n = r.state;
    n.t = s.t + h;
    n.x_S = s.x_S + h / 6.0 * (k1.v_S + 2.0 * k2.v_S + 2.0 * k3.v_S + k4.v_S);
    n.v_S = s.v_S + h / 6.0 * (k1.a_S + 2.0 * k2.a_S + 2.0 * k3.a_S + k4.a_S);
    if (ode) {
        const double xM = xM0 + h / 6.0 * (k1.v_M + 2.0 * k2.v_M + 2.0 * k3.v_M + k4.v_M);
        n.v_M = s.v_M + h / 6.0 * (k1.a_M + 2.0 * k2.a_M + 2.0 * k3.a_M + k4.a_M);
        n.x_M = xM - cfg.approach.retraction(n.t);
    } else {
        n.x_M = magnet_position(n.t, c, cfg);
    }
    n.x_SM = separation(n, cfg);
    if (n.x_SM <= cfg.coupling.min_gap) r.pull_in = true;
    return r;
}

ControllerState initial_controller(const SimConfig& cfg, double center) {
    ControllerState c;
    c.omega_hat = cfg.controller.lock || cfg.controller.open_loop_freq <= 0.0
                      ? cfg.sphere.natural_freq
                      : cfg.controller.open_loop_freq;
    c.agc_gain = cfg.drive_mode == DriveMode::agc ? cfg.controller.initial_gain
                                                  : cfg.controller.constant_gain;
    c.center = center;
    c.envelope = cfg.sphere.target_amplitude;
    c.prev_envelope = c.envelope;
    return c;
}

ControllerState controller_update(const SimState& s, double x_S_prev, double dt,
                                  const SimConfig& cfg) {
    ControllerState c = s.controller;
    const auto& set = cfg.controller;
    const double x = s.x_S;
    c.crossed = false;
    c.cycle_max = std::max(c.cycle_max, x);
    c.cycle_min = std::min(c.cycle_min, x);

    const double ref = c.center;
    if (x > ref + set.hysteresis * c.envelope) c.armed = true;

    const double refractory = set.refractory * two_pi / cfg.sphere.natural_freq;
    const bool spaced = c.last_crossing < 0.0 || s.t - c.last_crossing > refractory;
    if (!(c.armed && x_S_prev > ref && x <= ref && s.v_S < 0.0 && spaced)) return c;

    const double t_cross = s.t - dt * (x - ref) / (x - x_S_prev);
    if (c.last_crossing >= 0.0) {
        c.period_estimate = t_cross - c.last_crossing;
        if (set.lock) c.omega_hat = two_pi / c.period_estimate;
    }
    c.last_crossing = t_cross;
    if (set.lock) c.anchor = t_cross;
    c.crossing_count++;
    c.crossed = true;
    c.armed = false;

    if (c.crossing_count >= 2) {
        c.prev_envelope = c.envelope;
        c.envelope = 0.5 * (c.cycle_max - c.cycle_min);
        c.center = 0.5 * (c.cycle_max + c.cycle_min);
        if (cfg.drive_mode == DriveMode::agc && c.envelope > 0.0) {
            double f = cfg.sphere.target_amplitude / c.envelope;
            if (set.agc_damping != 0.0) f *= std::pow(c.prev_envelope / c.envelope, set.agc_damping);
            c.agc_gain *= std::clamp(f, 0.5, 2.0);
            c.agc_gain = std::min(c.agc_gain, set.gain_cap);
        }
    }
    c.cycle_max = x;
    c.cycle_min = x;
    return c;
}

SimState initial_state(const SimConfig& cfg) {
    const double s0 = cfg.coupling.rest_separation;
    double x_eq = 0.0;
    try {
        x_eq = static_equilibrium(s0, cfg.sphere) - s0;
    } catch (const DomainError&) {
        x_eq = 0.0;
    }
    SimState s;
    s.controller = initial_controller(cfg, x_eq);
    s.x_S = x_eq + cfg.sphere.target_amplitude;
    s.v_S = 0.0;
    s.controller.cycle_max = s.controller.cycle_min = s.x_S;
    if (cfg.magnet_mode == MagnetMode::prescribed) {
        s.x_M = magnet_position(0.0, s.controller, cfg);
    } else {
        s.x_M = -cfg.approach.retraction(0.0);
        s.v_M = 0.0;
    }
    s.x_SM = separation(s, cfg);
    return s;
}

TimeSeries run(const SimConfig& cfg) {
    cfg.validate();
    TimeSeries ts;
    ts.sample_period = cfg.dt * cfg.record_decimation;
    const auto n_steps = static_cast<std::int64_t>(std::llround(cfg.duration / cfg.dt));
    const std::size_t n_rec = static_cast<std::size_t>(n_steps / cfg.record_decimation + 2);
    for (auto* col : {&ts.t, &ts.x_S, &ts.x_M, &ts.x_SM, &ts.drive_S, &ts.f_hat}) col->reserve(n_rec);

    auto record = [&](const SimState& s) {
        ts.t.push_back(s.t);
        ts.x_S.push_back(s.x_S);
        ts.x_M.push_back(s.x_M);
        ts.x_SM.push_back(s.x_SM);
        ts.drive_S.push_back(sphere_drive(s.t, s.controller, cfg));
        ts.f_hat.push_back(s.controller.omega_hat / two_pi);
    };

    SimState s = initial_state(cfg);
    record(s);
    std::deque<double> recent;
    bool steady = false;
    for (std::int64_t i = 1; i <= n_steps; ++i) {
        const double x_prev = s.x_S;
        StepResult r = step(s, cfg);
        // time from the step counter so long runs do not accumulate rounding
        r.state.t = static_cast<double>(i) * cfg.dt;
        if (r.pull_in) {
            s = r.state;
            record(s);
            ts.events.push_back({s.t, EventKind::PullIn, s.x_SM});
            break;
        }
        s = r.state;
        s.controller = controller_update(s, x_prev, cfg.dt, cfg);
        const auto& c = s.controller;
        if (c.crossed) {
            ts.crossings.push_back(c.last_crossing);
            if (c.crossing_count >= 2) {
                ts.cycles.push_back({c.last_crossing, c.envelope, c.center, c.agc_gain});
                if (!steady && s.t >= cfg.approach.duration) {
                    recent.push_back(c.envelope);
                    if (recent.size() > 20) recent.pop_front();
                    if (recent.size() == 20) {
                        const auto [lo, hi] = std::minmax_element(recent.begin(), recent.end());
                        double mean = 0.0;
                        for (double e : recent) mean += e;
                        mean /= 20.0;
                        if ((*hi - *lo) < 0.01 * mean) {
                            steady = true;
                            ts.events.push_back({s.t, EventKind::SteadyState, c.envelope});
                        }
                    }
                }
            }
        }
        if (i % cfg.record_decimation == 0) record(s);
    }
    const double t_end = ts.t.empty() ? 0.0 : ts.t.back();
    ts.events.push_back({t_end, EventKind::ZeroCrossingSummary,
                         static_cast<double>(ts.crossings.size())});
    return ts;
}

}  // namespace casimir
