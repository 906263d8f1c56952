#include "casimir/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace casimir {

namespace {

constexpr double pi = std::numbers::pi;

enum class Dim { none, count, length, time, freq, angfreq, stiffness, gradient, angle, moment, sens, ppm };

struct Unit {
    const char* name;
    Dim dim;
    double factor;
};

const Unit units[] = {
    {"m", Dim::length, 1.0},         {"mm", Dim::length, 1e-3},     {"um", Dim::length, 1e-6},
    {"μm", Dim::length, 1e-6},       {"nm", Dim::length, 1e-9},     {"s", Dim::time, 1.0},
    {"ms", Dim::time, 1e-3},         {"us", Dim::time, 1e-6},       {"μs", Dim::time, 1e-6},
    {"ns", Dim::time, 1e-9},         {"Hz", Dim::freq, 1.0},        {"kHz", Dim::freq, 1e3},
    {"rad/s", Dim::angfreq, 1.0},    {"N/m", Dim::stiffness, 1.0},  {"mN/m", Dim::stiffness, 1e-3},
    {"T/m", Dim::gradient, 1.0},     {"pT/cm", Dim::gradient, 1e-10}, {"fT/cm", Dim::gradient, 1e-13},
    {"aT/cm", Dim::gradient, 1e-16}, {"rad", Dim::angle, 1.0},      {"deg", Dim::angle, pi / 180.0},
    {"A*m^2", Dim::moment, 1.0},     {"A·m²", Dim::moment, 1.0},    {"Hz/(pT/cm)", Dim::sens, 1.0},
    {"ppm", Dim::ppm, 1.0},
};

const char* canonical(Dim d) {
    switch (d) {
        case Dim::length: return "m";
        case Dim::time: return "s";
        case Dim::freq: return "Hz";
        case Dim::angfreq: return "rad/s";
        case Dim::stiffness: return "N/m";
        case Dim::gradient: return "T/m";
        case Dim::angle: return "rad";
        case Dim::moment: return "A*m^2";
        case Dim::sens: return "Hz/(pT/cm)";
        case Dim::ppm: return "ppm";
        default: return "";
    }
}

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::length: return "length";
        case Dim::time: return "time";
        case Dim::freq: return "frequency";
        case Dim::angfreq: return "angular frequency";
        case Dim::stiffness: return "stiffness";
        case Dim::gradient: return "field gradient";
        case Dim::angle: return "angle";
        case Dim::moment: return "magnetic moment";
        case Dim::sens: return "sensitivity";
        case Dim::ppm: return "ppm";
        default: return "dimensionless";
    }
}

// Hz and kHz are accepted for angular frequencies.
bool unit_factor(const std::string& u, Dim want, double& f) {
    if (want == Dim::angfreq && (u == "Hz" || u == "kHz")) {
        f = 2.0 * pi * (u == "Hz" ? 1.0 : 1e3);
        return true;
    }
    for (const auto& x : units)
        if (u == x.name && x.dim == want) {
            f = x.factor;
            return true;
        }
    return false;
}

enum class Bound { any, positive, nonneg };

struct NumKey {
    const char* name;
    Dim dim;
    Bound bound;
    std::function<double&(ScenarioSpec&)> ref;
};

struct IntKey {
    const char* name;
    int min;
    std::function<int&(ScenarioSpec&)> ref;
};

struct ListKey {
    const char* name;
    Dim dim;
    std::function<std::vector<double>&(ScenarioSpec&)> ref;
};

struct BoolKey {
    const char* name;
    std::function<bool&(ScenarioSpec&)> ref;
};

const std::vector<NumKey>& num_keys() {
    static const std::vector<NumKey> keys = {
        {"omega0_s", Dim::angfreq, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.sphere.natural_freq; }},
        {"k_s", Dim::stiffness, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.sphere.spring_k; }},
        {"q_s", Dim::none, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.sphere.quality; }},
        {"radius", Dim::length, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.sphere.radius; }},
        {"a_s", Dim::length, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.sphere.target_amplitude; }},
        {"tau1f", Dim::time, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.sphere.time_delay; }},
        {"omega0_m", Dim::angfreq, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.magnet.natural_freq; }},
        {"k_m", Dim::stiffness, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.magnet.spring_k; }},
        {"q_m", Dim::none, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.magnet.quality; }},
        {"a_m", Dim::length, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.magnet.pump_amplitude; }},
        {"tau2f", Dim::time, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.magnet.time_delay; }},
        {"moment", Dim::moment, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.magnet.moment; }},
        {"theta", Dim::angle, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.magnet.field_angle; }},
        {"pump_phase", Dim::angle, Bound::any, [](ScenarioSpec& s) -> double& { return s.base.magnet.pump_phase; }},
        {"s0", Dim::length, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.coupling.rest_separation; }},
        {"g_min", Dim::length, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.coupling.min_gap; }},
        {"q_c", Dim::none, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.coupling.coupled_quality; }},
        {"dt", Dim::time, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.dt; }},
        {"duration", Dim::time, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.duration; }},
        {"gradient_pp", Dim::gradient, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.gradient_signal.amplitude_pp; }},
        {"gradient_freq", Dim::freq, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.gradient_signal.frequency; }},
        {"open_loop_freq", Dim::angfreq, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.controller.open_loop_freq; }},
        {"drive_gain", Dim::none, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.controller.constant_gain; }},
        {"agc_initial_gain", Dim::none, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.controller.initial_gain; }},
        {"agc_gain_cap", Dim::none, Bound::positive, [](ScenarioSpec& s) -> double& { return s.base.controller.gain_cap; }},
        {"agc_damping", Dim::none, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.controller.agc_damping; }},
        {"crossing_hysteresis", Dim::none, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.controller.hysteresis; }},
        {"crossing_refractory", Dim::none, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.controller.refractory; }},
        {"approach_time", Dim::time, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.approach.duration; }},
        {"approach_offset", Dim::length, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.base.approach.offset; }},
        {"f_lo", Dim::freq, Bound::positive, [](ScenarioSpec& s) -> double& { return s.f_lo; }},
        {"f_hi", Dim::freq, Bound::positive, [](ScenarioSpec& s) -> double& { return s.f_hi; }},
        {"settle", Dim::time, Bound::positive, [](ScenarioSpec& s) -> double& { return s.settle; }},
        {"tau_lo", Dim::time, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.tau_lo; }},
        {"tau_hi", Dim::time, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.tau_hi; }},
        {"tau_step", Dim::time, Bound::positive, [](ScenarioSpec& s) -> double& { return s.tau_step; }},
        {"read_time", Dim::time, Bound::positive, [](ScenarioSpec& s) -> double& { return s.read_time; }},
        {"s_lo", Dim::length, Bound::any, [](ScenarioSpec& s) -> double& { return s.s_lo; }},
        {"s_hi", Dim::length, Bound::any, [](ScenarioSpec& s) -> double& { return s.s_hi; }},
        {"window", Dim::time, Bound::positive, [](ScenarioSpec& s) -> double& { return s.window; }},
        {"analysis_start", Dim::time, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.analysis_start; }},
        {"s_freq", Dim::sens, Bound::positive, [](ScenarioSpec& s) -> double& { return s.s_freq; }},
        {"counter_ppm", Dim::ppm, Bound::nonneg, [](ScenarioSpec& s) -> double& { return s.counter_ppm; }},
    };
    return keys;
}

const std::vector<IntKey>& int_keys() {
    static const std::vector<IntKey> keys = {
        {"decimation", 1, [](ScenarioSpec& s) -> int& { return s.base.record_decimation; }},
        {"points", 2, [](ScenarioSpec& s) -> int& { return s.points; }},
        {"csv_stride", 1, [](ScenarioSpec& s) -> int& { return s.csv_stride; }},
    };
    return keys;
}

const std::vector<ListKey>& list_keys() {
    static const std::vector<ListKey> keys = {
        {"delays", Dim::time, [](ScenarioSpec& s) -> std::vector<double>& { return s.delays; }},
        {"separations", Dim::length, [](ScenarioSpec& s) -> std::vector<double>& { return s.separations; }},
        {"ref_freqs", Dim::freq, [](ScenarioSpec& s) -> std::vector<double>& { return s.ref_freqs; }},
        {"cavities", Dim::length, [](ScenarioSpec& s) -> std::vector<double>& { return s.cavities; }},
    };
    return keys;
}

const std::vector<BoolKey>& bool_keys() {
    static const std::vector<BoolKey> keys = {
        {"lock", [](ScenarioSpec& s) -> bool& { return s.base.controller.lock; }},
        {"pump_off_reference", [](ScenarioSpec& s) -> bool& { return s.pump_off_reference; }},
        {"compare_null", [](ScenarioSpec& s) -> bool& { return s.compare_null; }},
        {"log_y", [](ScenarioSpec& s) -> bool& { return s.log_y; }},
    };
    return keys;
}

const std::map<std::string, Experiment>& experiments() {
    static const std::map<std::string, Experiment> m = {
        {"timedomain", Experiment::timedomain},
        {"bode", Experiment::bode},
        {"delay_sweep", Experiment::delay_sweep},
        {"separation_sweep", Experiment::separation_sweep},
        {"gradient_response", Experiment::gradient_response},
        {"fit", Experiment::fit},
        {"resolution", Experiment::resolution},
        {"potential_curve", Experiment::potential_curve},
    };
    return m;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

bool parse_number(const std::string& tok, double& v) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    if (b != e && *b == '+') ++b;
    auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e;
}

// "1, 2, 3 nm" -> numbers {1,2,3} and unit "nm"
void split_value(const std::string& value, std::vector<std::string>& nums, std::string& unit) {
    std::string s = value;
    for (auto& ch : s)
        if (ch == ',') ch = ' ';
    std::istringstream in(s);
    std::string tok;
    std::vector<std::string> toks;
    while (in >> tok) toks.push_back(tok);
    unit.clear();
    if (!toks.empty()) {
        double dummy;
        if (!parse_number(toks.back(), dummy)) {
            unit = toks.back();
            toks.pop_back();
        }
    }
    nums = toks;
}

std::vector<double> parse_values(const std::string& key, int line, Dim dim, const std::string& value,
                                 bool list) {
    std::vector<std::string> nums;
    std::string unit;
    split_value(value, nums, unit);
    if (!list && nums.empty()) throw ParseError(key, line, "missing numeric value");
    if (!list && nums.size() != 1) throw ParseError(key, line, "expected a single value");
    double f = 1.0;
    if (dim == Dim::none || dim == Dim::count) {
        if (!unit.empty()) throw ParseError(key, line, "takes no unit, got '" + unit + "'");
    } else if (unit.empty()) {
        if (!nums.empty()) throw ParseError(key, line, std::string("missing unit (") + dim_name(dim) + ")");
    } else if (!unit_factor(unit, dim, f)) {
        throw ParseError(key, line, "unit '" + unit + "' is not a " + dim_name(dim) + " unit");
    }
    std::vector<double> out;
    for (const auto& n : nums) {
        double v;
        if (!parse_number(n, v)) throw ParseError(key, line, "bad number '" + n + "'");
        if (!std::isfinite(v)) throw ParseError(key, line, "value must be finite");
        out.push_back(v * f);
    }
    return out;
}

template <class V>
const V* find_key(const std::vector<V>& keys, const std::string& k) {
    for (const auto& x : keys)
        if (k == x.name) return &x;
    return nullptr;
}

void finalize(ScenarioSpec& s) {
    auto& sp = s.base.sphere;
    sp = SphereParams::make(sp.spring_k, sp.natural_freq, sp.quality, sp.radius, sp.target_amplitude,
                            sp.time_delay);
    auto& mp = s.base.magnet;
    mp.mass = mp.spring_k / (mp.natural_freq * mp.natural_freq);
    s.base.gradient_signal.angle = mp.field_angle;
}

}  // namespace

std::string to_string(Experiment e) {
    for (const auto& [k, v] : experiments())
        if (v == e) return k;
    return "?";
}

ParseError::ParseError(const std::string& key, int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + key + ": " + what), key_(key), line_(line) {}

void ScenarioSpec::validate() const {
    base.validate();
    if (name.empty()) throw std::invalid_argument("scenario name is empty");
    switch (experiment) {
        case Experiment::bode:
            if (!(f_lo < f_hi)) throw std::invalid_argument("bode: f_lo must be below f_hi");
            if (base.drive_mode != DriveMode::constant_gain) throw std::invalid_argument("bode: needs drive_mode = constant_gain");
            break;
        case Experiment::delay_sweep:
            if (!(tau_lo <= tau_hi)) throw std::invalid_argument("delay_sweep: tau_lo must not exceed tau_hi");
            if (read_time + 0.05 > 10.0) throw std::invalid_argument("delay_sweep: read_time too large");
            break;
        case Experiment::separation_sweep:
            if (!(s_lo < s_hi)) throw std::invalid_argument("separation_sweep: s_lo must be below s_hi");
            if (points < 6) throw std::invalid_argument("separation_sweep: need >= 6 points for the fit");
            break;
        case Experiment::gradient_response:
            if (base.duration < 2.0) throw std::invalid_argument("gradient_response: duration must be >= 2 s");
            break;
        case Experiment::fit:
            if (data_file.empty()) throw std::invalid_argument("fit: data file required");
            break;
        case Experiment::potential_curve:
            if (!(s_lo < s_hi)) throw std::invalid_argument("potential_curve: s_lo must be below s_hi");
            break;
        default: break;
    }
}

ScenarioSpec parse_config(const std::string& text) {
    ScenarioSpec s;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(trim(body), line, "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw ParseError("?", line, "empty key");
        if (!seen.insert(key).second) throw ParseError(key, line, "duplicate key");

        if (const auto* k = find_key(num_keys(), key)) {
            const double v = parse_values(key, line, k->dim, value, false).front();
            if (k->bound == Bound::positive && !(v > 0)) throw ParseError(key, line, "must be positive");
            if (k->bound == Bound::nonneg && v < 0) throw ParseError(key, line, "must be non-negative");
            k->ref(s) = v;
        } else if (const auto* k = find_key(int_keys(), key)) {
            const double v = parse_values(key, line, Dim::count, value, false).front();
            if (v != std::floor(v) || v < k->min || v > 1e9)
                throw ParseError(key, line, "must be an integer >= " + std::to_string(k->min));
            k->ref(s) = static_cast<int>(v);
        } else if (const auto* k = find_key(list_keys(), key)) {
            k->ref(s) = parse_values(key, line, k->dim, value, true);
        } else if (const auto* k = find_key(bool_keys(), key)) {
            if (value == "true" || value == "yes" || value == "1")
                k->ref(s) = true;
            else if (value == "false" || value == "no" || value == "0")
                k->ref(s) = false;
            else
                throw ParseError(key, line, "expected true or false");
        } else if (key == "name") {
            if (value.empty()) throw ParseError(key, line, "must not be empty");
            s.name = value;
        } else if (key == "data") {
            s.data_file = value;
        } else if (key == "experiment") {
            auto it = experiments().find(value);
            if (it == experiments().end()) throw ParseError(key, line, "unknown experiment '" + value + "'");
            s.experiment = it->second;
        } else if (key == "magnet_mode") {
            if (value == "prescribed") s.base.magnet_mode = MagnetMode::prescribed;
            else if (value == "full_ode") s.base.magnet_mode = MagnetMode::full_ode;
            else throw ParseError(key, line, "expected prescribed or full_ode");
        } else if (key == "drive_mode") {
            if (value == "agc") s.base.drive_mode = DriveMode::agc;
            else if (value == "constant_gain") s.base.drive_mode = DriveMode::constant_gain;
            else throw ParseError(key, line, "expected agc or constant_gain");
        } else if (key == "gradient") {
            if (value == "none") s.base.gradient_signal.kind = GradientSignal::Kind::none;
            else if (value == "constant") s.base.gradient_signal.kind = GradientSignal::Kind::constant;
            else if (value == "sine") s.base.gradient_signal.kind = GradientSignal::Kind::sine;
            else throw ParseError(key, line, "expected none, constant or sine");
        } else {
            throw ParseError(key, line, "unknown key");
        }
    }
    try {
        finalize(s);
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError("(document)", line, e.what());
    }
    return s;
}

std::string print_config(const ScenarioSpec& spec) {
    ScenarioSpec s = spec;  // accessors need a mutable object
    std::ostringstream o;
    o << "# scenario " << s.name << "\n";
    o << "# magnet pump force uses k_m\n";
    o << "name = " << s.name << "\n";
    o << "experiment = " << to_string(s.experiment) << "\n";
    o << "magnet_mode = " << (s.base.magnet_mode == MagnetMode::prescribed ? "prescribed" : "full_ode") << "\n";
    o << "drive_mode = " << (s.base.drive_mode == DriveMode::agc ? "agc" : "constant_gain") << "\n";
    const char* kinds[] = {"none", "constant", "sine"};
    o << "gradient = " << kinds[static_cast<int>(s.base.gradient_signal.kind)] << "\n";
    if (!s.data_file.empty()) o << "data = " << s.data_file << "\n";
    for (const auto& k : num_keys()) {
        o << k.name << " = " << fmt(k.ref(s));
        if (k.dim != Dim::none) o << " " << canonical(k.dim);
        o << "\n";
    }
    for (const auto& k : int_keys()) o << k.name << " = " << k.ref(s) << "\n";
    for (const auto& k : list_keys()) {
        const auto& v = k.ref(s);
        o << k.name << " =";
        for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : " ") << fmt(v[i]);
        if (!v.empty()) o << " " << canonical(k.dim);
        o << "\n";
    }
    for (const auto& k : bool_keys()) o << k.name << " = " << (k.ref(s) ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace casimir
