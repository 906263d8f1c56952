#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace casimir {

// CODATA 2018
struct PhysicalConstants {
    static constexpr double hbar = 1.054571817e-34;  // J s
    static constexpr double c_light = 299792458.0;   // m/s
};

// Thrown when a gap is non-positive or a quasistatic state does not exist.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class PullInError : public DomainError {
public:
    using DomainError::DomainError;
};

struct SphereParams {
    double mass = 0.0;              // kg
    double radius = 60e-6;          // m
    double spring_k = 25e-3;        // N/m
    double quality = 1000.0;
    double natural_freq = 0.0;      // rad/s
    double target_amplitude = 20e-9;  // m
    double time_delay = 1.02e-3;    // s

    // Mass follows from k and omega0 so the pair stays consistent.
    static SphereParams make(double spring_k, double natural_freq, double quality,
                             double radius, double target_amplitude, double time_delay);
    static SphereParams defaults();

    void validate() const;
    bool operator==(const SphereParams&) const = default;
};

struct MagnetParams {
    double spring_k = 25e-3;        // N/m
    double quality = 1000.0;
    double mass = 0.0;              // kg, full ODE mode only
    double natural_freq = 0.0;      // rad/s, full ODE mode only
    double pump_amplitude = 10e-9;  // m
    double time_delay = 750e-6;     // s
    double moment = 0.0625;         // A m^2
    double field_angle = 0.0;       // rad
    double pump_phase = 1.5;        // rad, fixed offset of the 2f waveform

    static MagnetParams defaults();

    void validate() const;
    bool operator==(const MagnetParams&) const = default;
};

struct CouplingConfig {
    double rest_separation = 100e-9;  // m
    double min_gap = 10e-9;           // m
    double coupled_quality = 1000.0;

    void validate() const;
    bool operator==(const CouplingConfig&) const = default;
};

// pi^3 hbar c / 360
inline constexpr double casimir_prefactor =
    std::numbers::pi * std::numbers::pi * std::numbers::pi *
    PhysicalConstants::hbar * PhysicalConstants::c_light / 360.0;

double casimir_force(double gap, double R);
double casimir_potential(double gap, double R);
double parametric_stiffness(double gap, double R);
double magnetic_force(double moment, double grad_B, double theta);

double sphere_drive_force(double t, double omega_hat, double gain, const SphereParams& p);
double magnet_pump_displacement(double t, double omega_hat, double static_deflection,
                                const MagnetParams& p);

std::vector<double> total_potential_curve(const std::vector<double>& x_grid, double cavity,
                                          const SphereParams& p);

struct CriticalSeparation {
    double gap;         // g_crit, k_p(g_crit) = k
    double separation;  // s0_crit
};

CriticalSeparation critical_separation(const SphereParams& p);
double static_equilibrium(double s0, const SphereParams& p);
double softened_frequency(double gap, const SphereParams& p);

}  // namespace casimir
