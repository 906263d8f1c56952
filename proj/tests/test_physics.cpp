#include <doctest.h>

#include <cmath>

#include "casimir/physics.hpp"

using namespace casimir;

namespace {

// Frozen from a 30-digit independent evaluation.
constexpr double F_100nm = -1.63378623018584699e-10;
constexpr double U_100nm = -8.16893115092923497e-18;
constexpr double KP_100nm = 4.90135869055754098e-3;
constexpr double KP_91_5nm = 6.99249412071039477e-3;
constexpr double G_CRIT = 6.65417348400312620e-8;
constexpr double S0_CRIT = 8.87223131200416826e-8;
constexpr double G_EQ_100nm = 9.14571650097039432e-8;
constexpr double F_SOFT_100nm = 848.396054222129996;

constexpr double R = 60e-6;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("casimir force values and scaling") {
    CHECK(rel(casimir_force(100e-9, R), F_100nm) < 1e-12);
    CHECK(rel(casimir_force(100e-9, R), -1.634e-10) < 1e-3);
    CHECK(rel(casimir_force(200e-9, R), casimir_force(100e-9, R) / 8.0) < 1e-12);
    CHECK(std::abs(casimir_force(1.0, R)) < 1e-30);
    CHECK_THROWS_AS(casimir_force(0.0, R), DomainError);
    CHECK_THROWS_AS(casimir_force(-1e-9, R), DomainError);

    double prev = -1e300;
    for (double g = 20e-9; g < 1e-6; g *= 1.1) {
        const double f = casimir_force(g, R);
        CHECK(f < 0.0);
        CHECK(f > prev);  // magnitude strictly decreasing
        prev = f;
        CHECK(rel(casimir_force(2 * g, R), f / 8.0) < 1e-12);
    }
}

TEST_CASE("casimir potential") {
    CHECK(rel(casimir_potential(100e-9, R), U_100nm) < 1e-12);
    CHECK(rel(casimir_potential(100e-9, R), -8.17e-18) < 1e-3);
    CHECK(std::abs(casimir_potential(1e3, R)) < 1e-37);
    CHECK_THROWS_AS(casimir_potential(0.0, R), DomainError);

    // U(g) = -integral_g^inf F; compare with Simpson on [g, 1 mm] plus the analytic tail
    const double g = 100e-9, top = 1e-3;
    const int n = 200000;
    const double a = std::log(g), b = std::log(top), h = (b - a) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = a + i * h, x = std::exp(u);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * casimir_force(x, R) * x;
    }
    const double integral = sum * h / 3.0;
    CHECK(rel(integral + casimir_potential(top, R), casimir_potential(g, R)) < 1e-4);

    // central difference at 150 nm, step 1e-5 g
    const double g0 = 150e-9, d = 1e-5 * g0;
    const double fd = (casimir_potential(g0 + d, R) - casimir_potential(g0 - d, R)) / (2 * d);
    CHECK(rel(-fd, casimir_force(g0, R)) < 1e-6);
    for (double gg = 30e-9; gg < 2e-6; gg *= 1.37) {
        const double dd = 1e-5 * gg;
        const double f2 = (casimir_potential(gg + dd, R) - casimir_potential(gg - dd, R)) / (2 * dd);
        CHECK(rel(-f2, casimir_force(gg, R)) < 1e-6);
    }
}

TEST_CASE("parametric stiffness") {
    CHECK(rel(parametric_stiffness(100e-9, R), KP_100nm) < 1e-12);
    CHECK(rel(parametric_stiffness(100e-9, R), 4.90e-3) < 1e-3);
    CHECK(rel(parametric_stiffness(91.5e-9, R), KP_91_5nm) < 1e-12);
    CHECK(rel(parametric_stiffness(200e-9, R), parametric_stiffness(100e-9, R) / 16.0) < 1e-12);
    for (double g = 15e-9; g < 1e-5; g *= 1.5)
        CHECK(rel(parametric_stiffness(g, R) * g, 3.0 * std::abs(casimir_force(g, R))) < 1e-12);
    CHECK_THROWS_AS(parametric_stiffness(0.0, R), DomainError);
}

TEST_CASE("magnetic force") {
    CHECK(rel(magnetic_force(0.0625, 4e-10, 0.0), 2.5e-11) < 1e-12);
    CHECK(rel(magnetic_force(0.0625, 4e-10, 0.0) / 25e-3, 1e-9) < 1e-12);
    CHECK(std::abs(magnetic_force(0.0625, 4e-10, std::numbers::pi / 2)) < 1e-26);
    CHECK(magnetic_force(0.0625, 0.0, 0.3) == 0.0);
}

TEST_CASE("drive and pump waveforms") {
    const SphereParams sp = SphereParams::defaults();
    const double w = 2 * std::numbers::pi * 1000.0;
    const double t_peak = std::numbers::pi / 2 / w - sp.time_delay;
    CHECK(rel(sphere_drive_force(t_peak, w, 1.0, sp), 5.0e-10) < 1e-9);
    CHECK(sphere_drive_force(t_peak, w, 0.0, sp) == 0.0);
    const double t_zero = std::numbers::pi / w - sp.time_delay;
    CHECK(std::abs(sphere_drive_force(t_zero, w, 1.0, sp)) < 1e-22);

    MagnetParams mp = MagnetParams::defaults();
    mp.pump_phase = 0.0;
    const double tp = std::numbers::pi / 2 / (2 * w) - mp.time_delay;
    CHECK(rel(magnet_pump_displacement(tp, w, 0.0, mp), 10e-9) < 1e-9);
    const double t0 = -mp.time_delay;
    CHECK(rel(magnet_pump_displacement(t0, w, 0.5e-9, mp), 0.5e-9) < 1e-9);
    mp.pump_amplitude = 0.0;
    for (double t : {0.0, 1e-4, 3.3e-3}) CHECK(magnet_pump_displacement(t, w, 0.7e-9, mp) == 0.7e-9);
}

TEST_CASE("sphere parameters stay consistent") {
    const SphereParams sp = SphereParams::defaults();
    CHECK(rel(std::sqrt(sp.spring_k / sp.mass), sp.natural_freq) < 1e-12);
    SphereParams bad = sp;
    bad.mass = 1e-9;
    CHECK_THROWS(bad.validate());
    MagnetParams mp = MagnetParams::defaults();
    mp.field_angle = 4.0;
    CHECK_THROWS(mp.validate());
    CouplingConfig cc;
    cc.rest_separation = 5e-9;
    CHECK_THROWS(cc.validate());
}

TEST_CASE("total potential curve") {
    const SphereParams sp = SphereParams::defaults();
    CHECK(total_potential_curve({0.0}, 100e-9, sp)[0] == casimir_potential(100e-9, R));
    CHECK_THROWS_AS(total_potential_curve({0.0, 100e-9}, 100e-9, sp), DomainError);

    SphereParams free = sp;
    free.radius = 0.0;
    const std::vector<double> xs{-3e-9, 0.0, 2e-9, 50e-9};
    const auto u0 = total_potential_curve(xs, 100e-9, free);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(u0[i] == 0.5 * free.spring_k * xs[i] * xs[i]);

    auto stationary = [&](double s) {
        std::vector<double> x;
        for (int i = 0; i <= 2000; ++i) x.push_back(-40e-9 + (s - 41e-9 + 40e-9) * i / 2000.0);
        const auto u = total_potential_curve(x, s, sp);
        int minima = 0, maxima = 0;
        for (std::size_t i = 1; i + 1 < u.size(); ++i) {
            const double l = u[i] - u[i - 1], r = u[i + 1] - u[i];
            if (l < 0 && r >= 0) ++minima;
            if (l > 0 && r <= 0) ++maxima;
        }
        return std::pair{minima, maxima};
    };
    const auto [mn100, mx100] = stationary(100e-9);
    CHECK(mn100 == 1);
    CHECK(mx100 == 1);
    const auto [mn80, mx80] = stationary(80e-9);
    CHECK(mn80 == 0);
    CHECK(mx80 == 0);
}

TEST_CASE("critical separation and static equilibrium") {
    const SphereParams sp = SphereParams::defaults();
    const auto crit = critical_separation(sp);
    CHECK(rel(crit.gap, G_CRIT) < 1e-12);
    CHECK(rel(crit.separation, S0_CRIT) < 1e-12);
    CHECK(rel(parametric_stiffness(crit.gap, R), sp.spring_k) < 1e-9);

    SphereParams stiff = sp;
    stiff.spring_k *= 2;
    stiff.mass *= 2;
    CHECK(rel(critical_separation(stiff).gap, crit.gap * std::pow(2.0, -0.25)) < 1e-12);

    const double g = static_equilibrium(100e-9, sp);
    CHECK(rel(g, G_EQ_100nm) < 1e-12);
    CHECK(std::abs(sp.spring_k * (100e-9 - g) - std::abs(casimir_force(g, R))) < 1e-18);
    CHECK(g > crit.gap);

    CHECK_THROWS_AS(static_equilibrium(85e-9, sp), PullInError);
    CHECK_THROWS_AS(static_equilibrium(crit.separation * (1 - 1e-6), sp), PullInError);
    CHECK_NOTHROW(static_equilibrium(crit.separation * (1 + 1e-6), sp));

    SphereParams off = sp;
    off.radius = 0.0;
    CHECK(static_equilibrium(100e-9, off) == 100e-9);

    for (double s0 = 89e-9; s0 < 300e-9; s0 += 7e-9) {
        const double ge = static_equilibrium(s0, sp);
        CHECK(std::abs(sp.spring_k * (s0 - ge) + casimir_force(ge, R)) < 1e-18);
        CHECK(ge > crit.gap);
    }
}

TEST_CASE("softened frequency") {
    const SphereParams sp = SphereParams::defaults();
    const double f = softened_frequency(static_equilibrium(100e-9, sp), sp);
    CHECK(rel(f, F_SOFT_100nm) < 1e-10);
    CHECK(std::abs(f - 849.0) < 5.0);
    CHECK(std::abs(softened_frequency(1.0, sp) - 1000.0) < 1e-6);
    CHECK_THROWS_AS(softened_frequency(critical_separation(sp).gap, sp), DomainError);
    double prev = 0.0;
    for (double g = 67e-9; g < 1e-6; g *= 1.05) {
        const double v = softened_frequency(g, sp);
        CHECK(v > prev);
        prev = v;
    }
}
