#include "casimir/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace casimir {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> SweepResult::swept_values() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.swept);
    return v;
}

std::vector<double> SweepResult::summaries() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.summary);
    return v;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::vector<double> negative_crossings(const std::vector<double>& t, const std::vector<double>& x,
                                       double level) {
    std::vector<double> out;
    for (std::size_t i = 1; i < x.size() && i < t.size(); ++i) {
        const double a = x[i - 1] - level, b = x[i] - level;
        if (a > 0.0 && b <= 0.0) out.push_back(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
    }
    return out;
}

FrequencyTrack estimate_frequency(const TimeSeries& ts, double window) {
    FrequencyTrack tr;
    tr.window = window;
    if (ts.t.size() < 2 || window <= 0.0) return tr;
    const std::vector<double> cross =
        !ts.crossings.empty() ? ts.crossings : negative_crossings(ts.t, ts.x_S, mean_of(ts.x_S));
    if (cross.size() < 3) return tr;

    const double t_end = ts.t.back();
    const double hop = 0.5 * window;
    auto lo = cross.begin();
    for (long k = 0;; ++k) {
        const double start = static_cast<double>(k) * hop;
        const double stop = start + window;
        if (stop > t_end + 1e-12) break;
        lo = std::lower_bound(lo, cross.end(), start);
        const auto hi = std::lower_bound(lo, cross.end(), stop);
        const auto n = hi - lo;
        if (n >= 3) {
            tr.times.push_back(start + hop);
            tr.f0C.push_back(static_cast<double>(n - 1) / (*(hi - 1) - *lo));
        }
    }
    return tr;
}

std::vector<EnvelopePoint> amplitude_envelope(const TimeSeries& ts) {
    std::vector<EnvelopePoint> env;
    const std::vector<double> cross =
        !ts.crossings.empty() ? ts.crossings : negative_crossings(ts.t, ts.x_S, mean_of(ts.x_S));
    if (cross.size() < 2) {
        if (!ts.x_S.empty()) {
            const auto [lo, hi] = std::minmax_element(ts.x_S.begin(), ts.x_S.end());
            env.push_back({ts.t[static_cast<std::size_t>(hi - ts.x_S.begin())], 0.5 * (*hi - *lo)});
        }
        return env;
    }
    std::size_t i = 0;
    for (std::size_t c = 1; c < cross.size(); ++c) {
        while (i < ts.t.size() && ts.t[i] < cross[c - 1]) ++i;
        double mx = -std::numeric_limits<double>::infinity(), mn = -mx, t_at = 0.0;
        std::size_t j = i;
        for (; j < ts.t.size() && ts.t[j] < cross[c]; ++j) {
            if (ts.x_S[j] > mx) {
                mx = ts.x_S[j];
                t_at = ts.t[j];
            }
            mn = std::min(mn, ts.x_S[j]);
        }
        if (j > i) env.push_back({t_at, 0.5 * (mx - mn)});
        i = j;
    }
    return env;
}

double tail_frequency(const TimeSeries& ts, std::size_t n) {
    const auto& c = ts.crossings;
    if (c.size() < 3) return nan;
    n = std::min(n + 1, c.size());
    const double t1 = c[c.size() - n];
    return static_cast<double>(n - 1) / (c.back() - t1);
}

double envelope_at(const TimeSeries& ts, double t) {
    if (ts.cycles.empty()) return nan;
    auto it = std::lower_bound(ts.cycles.begin(), ts.cycles.end(), t,
                               [](const CycleRecord& r, double v) { return r.time < v; });
    if (it == ts.cycles.end()) --it;
    if (it != ts.cycles.begin() && std::abs((it - 1)->time - t) <= std::abs(it->time - t)) --it;
    return it->envelope;
}

SweepResult bode_sweep(const SimConfig& cfg, double f_lo, double f_hi, int n_points, int workers,
                       double settle) {
    if (!(f_lo < f_hi) || n_points < 2) throw std::invalid_argument("bode_sweep: need f_lo < f_hi and >= 2 points");
    if (cfg.drive_mode != DriveMode::constant_gain) throw std::invalid_argument("bode_sweep: needs constant_gain drive");
    SweepResult res;
    res.swept_name = "frequency(Hz)";
    res.summary_name = "amplitude(dB)";
    res.points.resize(static_cast<std::size_t>(n_points));

    parallel_for(res.points.size(), workers, [&](std::size_t k) {
        const double f = f_lo + (f_hi - f_lo) * static_cast<double>(k) / (n_points - 1);
        SimConfig c = cfg;
        c.controller.lock = false;
        c.controller.open_loop_freq = two_pi * f;
        const double period = 1.0 / f;
        const double n_per = std::max(1.0, std::floor(0.2 / period));
        c.duration = settle + n_per * period;
        const TimeSeries ts = run(c);
        SweepPoint& p = res.points[k];
        p.swept = f;
        if (ts.pulled_in()) {
            p.pull_in = true;
            p.pull_in_time = ts.pull_in_time();
            p.summary = nan;
            return;
        }
        // lock-in over whole drive periods referenced to the drive phase
        const double t0 = ts.t.back() - n_per * period;
        double si = 0.0, co = 0.0, m = 0.0, cnt = 0.0;
        for (std::size_t i = 0; i < ts.t.size(); ++i)
            if (ts.t[i] >= t0) {
                m += ts.x_S[i];
                cnt += 1.0;
            }
        m /= cnt;
        const double w = two_pi * f;
        for (std::size_t i = 0; i < ts.t.size(); ++i) {
            if (ts.t[i] < t0) continue;
            const double ph = w * (ts.t[i] + c.sphere.time_delay);
            si += (ts.x_S[i] - m) * std::sin(ph);
            co += (ts.x_S[i] - m) * std::cos(ph);
        }
        si *= 2.0 / cnt;
        co *= 2.0 / cnt;
        const double amp = std::hypot(si, co);
        const double x_static = c.controller.constant_gain * c.sphere.target_amplitude;
        p.summary = 20.0 * std::log10(amp / x_static);
        p.phase = std::atan2(-co, si);
        p.envelope = amp;
    });
    return res;
}

SweepResult delay_sweep(const SimConfig& cfg, const std::vector<double>& tau2f_values,
                        double read_time, int workers) {
    SweepResult res;
    res.swept_name = "tau2f(s)";
    res.summary_name = "amplitude(m)";
    res.points.resize(tau2f_values.size());
    parallel_for(tau2f_values.size(), workers, [&](std::size_t k) {
        SimConfig c = cfg;
        c.magnet.time_delay = tau2f_values[k];
        c.duration = std::max(0.4, read_time + 0.05);
        const TimeSeries ts = run(c);
        SweepPoint& p = res.points[k];
        p.swept = tau2f_values[k];
        if (ts.pulled_in()) {
            p.pull_in = true;
            p.pull_in_time = ts.pull_in_time();
            p.summary = nan;
        } else {
            p.summary = envelope_at(ts, read_time);
            p.envelope = p.summary;
        }
    });
    return res;
}

SweepResult separation_sweep(const SimConfig& cfg, const std::vector<double>& s_values, int workers) {
    SweepResult res;
    res.swept_name = "s0(m)";
    res.summary_name = "f0C(Hz)";
    res.points.resize(s_values.size());
    parallel_for(s_values.size(), workers, [&](std::size_t k) {
        SimConfig c = cfg;
        c.coupling.rest_separation = s_values[k];
        const TimeSeries ts = run(c);
        SweepPoint& p = res.points[k];
        p.swept = s_values[k];
        if (ts.pulled_in() || ts.crossings.size() < 60) {
            p.pull_in = ts.pulled_in();
            p.pull_in_time = ts.pull_in_time();
            p.summary = nan;
            p.mean_gap = nan;
            return;
        }
        p.summary = tail_frequency(ts, 50);
        const double t_from = ts.crossings[ts.crossings.size() - 51];
        const double t_to = ts.crossings.back();
        double sum = 0.0, cnt = 0.0;
        for (std::size_t i = 0; i < ts.t.size(); ++i)
            if (ts.t[i] >= t_from && ts.t[i] < t_to) {
                sum += ts.x_SM[i];
                cnt += 1.0;
            }
        p.mean_gap = sum / cnt;
        p.envelope = ts.cycles.empty() ? nan : ts.cycles.back().envelope;
    });
    return res;
}

ResonancePeak resonance_peak(const SweepResult& bode) {
    ResonancePeak r;
    std::vector<double> f, a;
    for (const auto& p : bode.points)
        if (!p.pull_in && std::isfinite(p.summary)) {
            f.push_back(p.swept);
            a.push_back(std::pow(10.0, p.summary / 20.0));
        }
    if (f.size() < 3) return r;
    const auto k = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
    r.frequency = f[k];
    double peak = a[k];
    if (k > 0 && k + 1 < f.size()) {
        // vertex of the parabola through the three samples around the maximum
        const double y0 = a[k - 1], y1 = a[k], y2 = a[k + 1];
        const double h = 0.5 * (f[k + 1] - f[k - 1]);
        const double den = y0 - 2.0 * y1 + y2;
        if (den < 0.0) {
            const double off = 0.5 * (y0 - y2) / den;
            r.frequency = f[k] + off * h;
            peak = y1 - 0.25 * (y0 - y2) * off;
        }
    }
    r.peak_db = 20.0 * std::log10(peak);
    const double half = peak / std::sqrt(2.0);
    double lo = nan, hi = nan;
    for (std::size_t i = k; i > 0; --i)
        if (a[i - 1] <= half && a[i] > half) {
            lo = f[i - 1] + (half - a[i - 1]) / (a[i] - a[i - 1]) * (f[i] - f[i - 1]);
            break;
        }
    for (std::size_t i = k; i + 1 < f.size(); ++i)
        if (a[i] > half && a[i + 1] <= half) {
            hi = f[i] + (a[i] - half) / (a[i] - a[i + 1]) * (f[i + 1] - f[i]);
            break;
        }
    r.quality = (std::isfinite(lo) && std::isfinite(hi)) ? r.frequency / (hi - lo) : nan;

    // Under-resolved peak: 1/|H|^2 of a Lorentzian is quadratic in f near resonance,
    // so the parabola through the top three samples gives centre and half-power width.
    const auto above = std::count_if(a.begin(), a.end(), [&](double v) { return v > half; });
    if (above < 5 && k > 0 && k + 1 < f.size()) {
        const double x0 = f[k - 1], x1 = f[k], x2 = f[k + 1];
        const double q0 = 1 / (a[k - 1] * a[k - 1]), q1 = 1 / (a[k] * a[k]), q2 = 1 / (a[k + 1] * a[k + 1]);
        const double d01 = (q1 - q0) / (x1 - x0), d12 = (q2 - q1) / (x2 - x1);
        const double c2 = (d12 - d01) / (x2 - x0);
        if (c2 > 0.0) {
            const double f0 = 0.5 * (x0 + x1) - d01 / (2 * c2);
            const double base = q0 + d01 * (f0 - x0) + c2 * (f0 - x0) * (f0 - x1);
            if (base > 0.0) {
                r.frequency = f0;
                r.peak_db = -10.0 * std::log10(base);
                r.quality = f0 / (2.0 * std::sqrt(base / c2));
            }
        }
    }
    return r;
}

std::vector<SensitivityResult> sensitivity(const SweepResult& sweep, double magnet_k, double moment,
                                           double theta) {
    const double ct = std::cos(theta);
    if (std::abs(ct) < 1e-12) throw DomainError("sensitivity: field orthogonal to the moment");
    if (sweep.points.size() < 2) throw std::invalid_argument("sensitivity: need >= 2 sweep points");
    constexpr double pT_per_cm = 1e-10;  // T/m
    std::vector<SensitivityResult> out;
    for (std::size_t i = 1; i < sweep.points.size(); ++i) {
        const auto& p0 = sweep.points[i - 1];
        const auto& p1 = sweep.points[i];
        const double dx = p1.swept - p0.swept;
        const double dgrad = magnet_k * dx / (moment * ct) / pT_per_cm;
        out.push_back({(p1.summary - p0.summary) / dgrad, 0.5 * (p0.swept + p1.swept), std::abs(dgrad)});
    }
    return out;
}

double best_case_resolution(double S, double counter_ppm, double ref_freq) {
    if (!(S > 0.0) || counter_ppm < 0.0 || !(ref_freq > 0.0))
        throw std::invalid_argument("best_case_resolution: need S > 0, ppm >= 0, ref > 0");
    const double pT_per_cm = counter_ppm * 1e-6 * ref_freq / S;
    return pT_per_cm * 1e6;  // aT/cm
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y, double f_lo,
                          double f_hi) {
    if (t.size() < 4) return nan;
    const double ym = mean_of(y);
    auto power = [&](double f) {
        // least-squares sine + cosine + offset
        double ss = 0, cc = 0, sc = 0, s1 = 0, c1 = 0, ys = 0, yc = 0;
        const double n = static_cast<double>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double s = std::sin(two_pi * f * t[i]), c = std::cos(two_pi * f * t[i]);
            const double v = y[i] - ym;
            ss += s * s; cc += c * c; sc += s * c; s1 += s; c1 += c; ys += v * s; yc += v * c;
        }
        ss -= s1 * s1 / n; cc -= c1 * c1 / n; sc -= s1 * c1 / n;
        const double det = ss * cc - sc * sc;
        if (std::abs(det) < 1e-300) return 0.0;
        const double A = (ys * cc - yc * sc) / det, B = (yc * ss - ys * sc) / det;
        return A * ys + B * yc;  // explained sum of squares
    };
    const int n = 2000;
    double best_f = f_lo, best_p = -1.0;
    const double h = (f_hi - f_lo) / n;
    for (int i = 0; i <= n; ++i) {
        const double f = f_lo + h * i;
        const double p = power(f);
        if (p > best_p) {
            best_p = p;
            best_f = f;
        }
    }
    // golden-section refinement inside the winning bin
    double a = std::max(f_lo, best_f - h), b = std::min(f_hi, best_f + h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a), p1 = power(x1), p2 = power(x2);
    for (int it = 0; it < 60; ++it) {
        if (p1 > p2) {
            b = x2; x2 = x1; p2 = p1; x1 = b - g * (b - a); p1 = power(x1);
        } else {
            a = x1; x1 = x2; p1 = p2; x2 = a + g * (b - a); p2 = power(x2);
        }
    }
    return 0.5 * (a + b);
}

GradientResponse gradient_response(const SimConfig& cfg, double window, double analysis_start) {
    GradientResponse gr;
    gr.series = run(cfg);
    if (gr.series.pulled_in())
        throw PullInError("gradient_response: pull-in at t=" + std::to_string(gr.series.pull_in_time()) + " s");
    for (const auto& e : gr.series.events)
        if (e.kind == EventKind::SteadyState) gr.steady_time = e.time;
    gr.track = estimate_frequency(gr.series, window);
    std::vector<double> tt, ff;
    for (std::size_t i = 0; i < gr.track.times.size(); ++i)
        if (gr.track.times[i] - 0.5 * window >= analysis_start) {
            tt.push_back(gr.track.times[i]);
            ff.push_back(gr.track.f0C[i]);
        }
    if (ff.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(ff.begin(), ff.end());
        gr.peak_to_peak = *hi - *lo;
        gr.dominant_frequency = dominant_frequency(tt, ff, 0.2, 5.0);
    }
    return gr;
}

}  // namespace casimir
