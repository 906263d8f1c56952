#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casimir/physics.hpp"

namespace casimir {

enum class MagnetMode { prescribed, full_ode };
enum class DriveMode { agc, constant_gain };

struct GradientSignal {
    enum class Kind { none, constant, sine };
    Kind kind = Kind::none;
    double amplitude_pp = 0.0;  // T/m
    double frequency = 0.0;     // Hz
    double angle = 0.0;         // rad

    double value(double t) const;  // T/m
    void validate() const;
    bool operator==(const GradientSignal&) const = default;
};

// Knobs of the crossing-locked drive. Defaults are the calibrated nominal values.
struct ControllerSettings {
    bool lock = true;                 // false: open-loop drive at open_loop_freq, no re-anchoring
    double open_loop_freq = 0.0;      // rad/s, 0 means omega0S
    double constant_gain = 1.0;       // drive gain in constant_gain mode
    double initial_gain = 1e-3;       // agc starting gain
    double gain_cap = 0.03;           // agc ceiling
    double agc_damping = 8.0;         // exponent on prev/current envelope ratio
    double hysteresis = 0.25;         // re-arm level, fraction of the envelope above center
    double refractory = 0.65;         // min crossing spacing, fraction of 2pi/omega0S

    bool operator==(const ControllerSettings&) const = default;
};

// Magnet held back by `offset` at t=0 and walked in linearly over `duration`.
struct ApproachSettings {
    double duration = 0.1;   // s
    double offset = 100e-9;  // m

    double retraction(double t) const;
    bool operator==(const ApproachSettings&) const = default;
};

struct SimConfig {
    SphereParams sphere = SphereParams::defaults();
    MagnetParams magnet = MagnetParams::defaults();
    CouplingConfig coupling;
    double dt = 0.5e-6;
    double duration = 2.0;
    MagnetMode magnet_mode = MagnetMode::prescribed;
    DriveMode drive_mode = DriveMode::agc;
    GradientSignal gradient_signal;
    int record_decimation = 10;
    ControllerSettings controller;
    ApproachSettings approach;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

struct ControllerState {
    double omega_hat = 0.0;        // rad/s
    double anchor = 0.0;           // s, drive phase reference (last crossing)
    double last_crossing = -1.0;   // s, negative before the first crossing
    double period_estimate = 0.0;  // s
    double agc_gain = 0.0;
    std::int64_t crossing_count = 0;
    bool armed = true;
    double cycle_max = 0.0;
    double cycle_min = 0.0;
    double center = 0.0;           // mid-level of the last full cycle
    double envelope = 0.0;         // half peak-to-peak of the last full cycle
    double prev_envelope = 0.0;
    bool crossed = false;          // set on the step that registered a crossing
};

struct SimState {
    double t = 0.0;
    double x_S = 0.0;
    double v_S = 0.0;
    double x_M = 0.0;
    double v_M = 0.0;
    double x_SM = 0.0;
    ControllerState controller;
};

enum class EventKind { PullIn, SteadyState, ZeroCrossingSummary };
std::string to_string(EventKind k);

struct Event {
    double time;
    EventKind kind;
    double value;  // gap for PullIn, envelope for SteadyState, count for the summary
};

struct CycleRecord {
    double time;      // crossing time that closed the cycle
    double envelope;  // m
    double center;    // m
    double gain;
};

struct TimeSeries {
    double sample_period = 0.0;
    std::vector<double> t, x_S, x_M, x_SM, drive_S, f_hat;
    std::vector<double> crossings;  // interpolated negative-slope crossing times at full dt
    std::vector<CycleRecord> cycles;
    std::vector<Event> events;

    std::size_t size() const { return t.size(); }
    bool pulled_in() const;
    double pull_in_time() const;  // negative when no pull-in
};

// Separation and external force pieces that depend only on time and controller state.
double magnet_position(double t, const ControllerState& c, const SimConfig& cfg);
double sphere_drive(double t, const ControllerState& c, const SimConfig& cfg);

double acceleration_sphere(const SimState& s, const SimConfig& cfg);

struct StepResult {
    SimState state;
    bool pull_in = false;
};

StepResult step(const SimState& s, const SimConfig& cfg);

ControllerState initial_controller(const SimConfig& cfg, double center);
ControllerState controller_update(const SimState& s, double x_S_prev, double dt,
                                  const SimConfig& cfg);

SimState initial_state(const SimConfig& cfg);
TimeSeries run(const SimConfig& cfg);

}  // namespace casimir
