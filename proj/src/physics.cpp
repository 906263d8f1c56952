#include "casimir/physics.hpp"

#include <cmath>
#include <limits>

namespace casimir {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void require_gap(double gap) {
    if (!(gap > 0.0)) throw DomainError("non-positive gap (contact)");
}

}  // namespace

SphereParams SphereParams::make(double spring_k, double natural_freq, double quality,
                                double radius, double target_amplitude, double time_delay) {
    SphereParams p;
    p.spring_k = spring_k;
    p.natural_freq = natural_freq;
    p.mass = spring_k / (natural_freq * natural_freq);
    p.quality = quality;
    p.radius = radius;
    p.target_amplitude = target_amplitude;
    p.time_delay = time_delay;
    p.validate();
    return p;
}

SphereParams SphereParams::defaults() {
    return make(25e-3, 2.0 * std::numbers::pi * 1000.0, 1000.0, 60e-6, 20e-9, 1.02e-3);
}

void SphereParams::validate() const {
    require(mass > 0 && spring_k > 0 && quality > 0 && natural_freq > 0, "sphere: parameters must be positive");
    require(radius >= 0, "sphere: radius must be non-negative");
    require(target_amplitude > 0 && time_delay >= 0, "sphere: bad drive settings");
    const double w = std::sqrt(spring_k / mass);
    require(std::abs(w - natural_freq) <= 1e-9 * natural_freq, "sphere: omega0 inconsistent with k and m");
}

MagnetParams MagnetParams::defaults() {
    MagnetParams p;
    p.natural_freq = 2.0 * std::numbers::pi * 1000.0;
    p.mass = p.spring_k / (p.natural_freq * p.natural_freq);
    return p;
}

void MagnetParams::validate() const {
    require(spring_k > 0 && quality > 0 && moment > 0, "magnet: k, Q and moment must be positive");
    require(pump_amplitude >= 0, "magnet: pump amplitude must be non-negative");
    require(time_delay >= 0, "magnet: time delay must be non-negative");
    require(field_angle >= 0 && field_angle <= std::numbers::pi, "magnet: field angle outside [0, pi]");
    require(mass >= 0 && natural_freq >= 0, "magnet: mass and omega0 must be non-negative");
}

void CouplingConfig::validate() const {
    require(min_gap > 0 && rest_separation > min_gap, "coupling: need s0 > g_min > 0");
    require(coupled_quality > 0, "coupling: Q_C must be positive");
}

double casimir_force(double gap, double R) {
    require_gap(gap);
    return -casimir_prefactor * R / (gap * gap * gap);
}

double casimir_potential(double gap, double R) {
    require_gap(gap);
    return -0.5 * casimir_prefactor * R / (gap * gap);
}

double parametric_stiffness(double gap, double R) {
    require_gap(gap);
    return 3.0 * casimir_prefactor * R / (gap * gap * gap * gap);
}

double magnetic_force(double moment, double grad_B, double theta) {
    return moment * grad_B * std::cos(theta);
}

double sphere_drive_force(double t, double omega_hat, double gain, const SphereParams& p) {
    return gain * p.spring_k * p.target_amplitude * std::sin(omega_hat * (t + p.time_delay));
}

double magnet_pump_displacement(double t, double omega_hat, double static_deflection,
                                const MagnetParams& p) {
    return p.pump_amplitude * std::sin(2.0 * omega_hat * (t + p.time_delay) + p.pump_phase) +
           static_deflection;
}

std::vector<double> total_potential_curve(const std::vector<double>& x_grid, double cavity,
                                          const SphereParams& p) {
    std::vector<double> u;
    u.reserve(x_grid.size());
    for (double x : x_grid) {
        const double gap = cavity - x;
        if (!(gap > 0.0)) throw DomainError("potential curve: grid point at or beyond contact");
        u.push_back(0.5 * p.spring_k * x * x + (p.radius > 0 ? casimir_potential(gap, p.radius) : 0.0));
    }
    return u;
}

CriticalSeparation critical_separation(const SphereParams& p) {
    const double C = casimir_prefactor * p.radius;
    const double g = std::pow(3.0 * C / p.spring_k, 0.25);
    return {g, 4.0 / 3.0 * g};
}

double static_equilibrium(double s0, const SphereParams& p) {
    if (p.radius == 0.0) return s0;
    const auto crit = critical_separation(p);
    if (!(s0 > crit.separation)) throw PullInError("static equilibrium: s0 below critical separation");
    // k(s0-g) - |F(g)| is positive at g_crit, negative at s0 and decreasing between
    auto residual = [&](double g) { return p.spring_k * (s0 - g) + casimir_force(g, p.radius); };
    double lo = crit.gap, hi = s0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
}

double softened_frequency(double gap, const SphereParams& p) {
    const double keff = p.spring_k - (p.radius > 0 ? parametric_stiffness(gap, p.radius) : 0.0);
    if (!(keff > 0.0)) throw DomainError("softened frequency: k_p >= k (statically unstable)");
    return std::sqrt(keff / p.mass) / (2.0 * std::numbers::pi);
}

}  // namespace casimir
