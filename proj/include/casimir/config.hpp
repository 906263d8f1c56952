#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/dynamics.hpp"

namespace casimir {

enum class Experiment {
    timedomain,
    bode,
    delay_sweep,
    separation_sweep,
    gradient_response,
    fit,
    resolution,
    potential_curve
};

std::string to_string(Experiment e);

struct ScenarioSpec {
    std::string name = "custom";
    SimConfig base;
    Experiment experiment = Experiment::timedomain;

    // timedomain: one run per entry (tau2f), base only when empty
    std::vector<double> delays;
    // bode: one sweep per rest separation
    std::vector<double> separations;
    double f_lo = 990.0;   // Hz
    double f_hi = 1010.0;  // Hz
    double settle = 3.0;   // s
    // delay sweep
    double tau_lo = 0.0;
    double tau_hi = 1300e-6;
    double tau_step = 25e-6;
    double read_time = 0.35;
    bool pump_off_reference = true;
    // separation sweep, also used for potential_curve x-range
    double s_lo = 100e-9;
    double s_hi = 103e-9;
    int points = 13;
    // gradient response
    double window = 0.1;
    double analysis_start = 0.5;
    bool compare_null = true;
    // fit
    std::string data_file;
    // resolution
    double s_freq = 6.0;  // Hz per pT/cm
    double counter_ppm = 10.0;
    std::vector<double> ref_freqs{1.0};
    // potential curve
    std::vector<double> cavities;
    // output
    bool log_y = false;
    int csv_stride = 20;

    std::string output_dir;  // set by the caller, not part of the document

    void validate() const;
    bool operator==(const ScenarioSpec&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& key, int line, const std::string& what);
    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    std::string key_;
    int line_;
};

ScenarioSpec parse_config(const std::string& text);
std::string print_config(const ScenarioSpec& spec);

}  // namespace casimir
