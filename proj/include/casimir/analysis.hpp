#pragma once

#include <functional>
#include <string>
#include <vector>

#include "casimir/dynamics.hpp"

namespace casimir {

struct FrequencyTrack {
    double window = 0.0;
    std::vector<double> times;  // window centers, s
    std::vector<double> f0C;    // Hz
};

struct EnvelopePoint {
    double time;  // s, at the cycle peak
    double peak;  // m, half peak-to-peak of the cycle
};

struct SweepPoint {
    double swept;
    double summary;     // NaN when the point pulled in
    bool pull_in = false;
    double pull_in_time = -1.0;
    double phase = 0.0;        // bode: rad
    double mean_gap = 0.0;     // separation sweep: mean x_SM, m
    double envelope = 0.0;     // m
};

struct SweepResult {
    std::string swept_name;    // with unit, e.g. "tau2f(s)"
    std::string summary_name;
    std::vector<SweepPoint> points;

    std::vector<double> swept_values() const;
    std::vector<double> summaries() const;
};

struct FitResult {
    double a = 0, b = 0, c = 0, d = 0;
    double rms_residual = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> best_history;  // best objective after each simplex iteration (winning start)

    double operator()(double x) const;
};

struct SensitivityResult {
    double S_freq;                    // Hz per pT/cm
    double at_separation;             // m, midpoint of the pair
    double equivalent_gradient_step;  // pT/cm
};

struct GradientResponse {
    FrequencyTrack track;
    double dominant_frequency = 0.0;  // Hz
    double peak_to_peak = 0.0;        // Hz
    double steady_time = -1.0;        // s, SteadyState event or negative
    TimeSeries series;
};

// Negative-slope crossings of x_S about its mean, linearly interpolated.
std::vector<double> negative_crossings(const std::vector<double>& t, const std::vector<double>& x,
                                       double level);

FrequencyTrack estimate_frequency(const TimeSeries& ts, double window);
std::vector<EnvelopePoint> amplitude_envelope(const TimeSeries& ts);

// f0C over the last n crossings recorded by the controller.
double tail_frequency(const TimeSeries& ts, std::size_t n_crossings = 50);
double envelope_at(const TimeSeries& ts, double t);

SweepResult bode_sweep(const SimConfig& cfg, double f_lo, double f_hi, int n_points,
                       int workers = 1, double settle = 3.0);
SweepResult delay_sweep(const SimConfig& cfg, const std::vector<double>& tau2f_values,
                        double read_time = 0.35, int workers = 1);
SweepResult separation_sweep(const SimConfig& cfg, const std::vector<double>& s_values,
                             int workers = 1);

struct ResonancePeak {
    double frequency = 0.0;  // Hz, parabolic refinement of the sampled maximum
    double quality = 0.0;    // f / half-power width
    double peak_db = 0.0;
};

ResonancePeak resonance_peak(const SweepResult& bode);

std::vector<SensitivityResult> sensitivity(const SweepResult& sweep, double magnet_k,
                                           double moment, double theta);
FitResult fit_inverse_power(const std::vector<double>& x, const std::vector<double>& y);
double best_case_resolution(double S, double counter_ppm, double ref_freq);  // aT/cm

GradientResponse gradient_response(const SimConfig& cfg, double window = 0.1,
                                   double analysis_start = 0.5);

// Dominant frequency of a sampled track by least-squares sine scan over [f_lo, f_hi].
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y, double f_lo,
                          double f_hi);

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace casimir
