#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "casimir/analysis.hpp"

namespace casimir {

namespace {

using Vec2 = std::array<double, 2>;

struct Projected {
    double ssr;
    double A, D;
};

// For fixed (B, c) the model A*(X-B)^-c + D is linear in A and D.
Projected project(const std::vector<double>& X, const std::vector<double>& Y, double B, double c) {
    const double n = static_cast<double>(X.size());
    double sp = 0, spp = 0, sy = 0, spy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double p = std::pow(X[i] - B, -c);
        sp += p; spp += p * p; sy += Y[i]; spy += p * Y[i];
    }
    const double det = n * spp - sp * sp;
    Projected r{std::numeric_limits<double>::infinity(), 0.0, sy / n};
    if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) return r;
    r.A = (n * spy - sp * sy) / det;
    r.D = (sy - r.A * sp) / n;
    double ssr = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double e = r.A * std::pow(X[i] - B, -c) + r.D - Y[i];
        ssr += e * e;
    }
    r.ssr = std::isfinite(ssr) ? ssr : std::numeric_limits<double>::infinity();
    return r;
}

struct NelderMeadOut {
    Vec2 best;
    double value;
    bool converged;
    int iterations;
    std::vector<double> history;
};

template <class F>
NelderMeadOut nelder_mead(F&& f, Vec2 x0, Vec2 step, double tol, int max_iter) {
    std::array<Vec2, 3> s{x0, x0, x0};
    s[1][0] += step[0];
    s[2][1] += step[1];
    std::array<double, 3> v{f(s[0]), f(s[1]), f(s[2])};
    NelderMeadOut out{};
    int it = 0;
    for (; it < max_iter; ++it) {
        std::array<int, 3> o{0, 1, 2};
        std::sort(o.begin(), o.end(), [&](int a, int b) { return v[a] < v[b]; });
        const Vec2 b = s[o[0]], m = s[o[1]], w = s[o[2]];
        const double fb = v[o[0]], fm = v[o[1]], fw = v[o[2]];
        out.history.push_back(fb);

        double size = 0.0;
        for (int k : {1, 2})
            for (int d = 0; d < 2; ++d)
                size = std::max(size, std::abs(s[o[k]][d] - b[d]) / (1.0 + std::abs(b[d])));
        if (size < tol) {
            out.converged = true;
            break;
        }

        const Vec2 cen{0.5 * (b[0] + m[0]), 0.5 * (b[1] + m[1])};
        auto along = [&](double t) { return Vec2{cen[0] + t * (w[0] - cen[0]), cen[1] + t * (w[1] - cen[1])}; };
        const Vec2 r = along(-1.0);
        const double fr = f(r);
        if (fr < fb) {
            const Vec2 e = along(-2.0);
            const double fe = f(e);
            if (fe < fr) { s[o[2]] = e; v[o[2]] = fe; }
            else { s[o[2]] = r; v[o[2]] = fr; }
        } else if (fr < fm) {
            s[o[2]] = r; v[o[2]] = fr;
        } else {
            const bool outside = fr < fw;
            const Vec2 k = along(outside ? -0.5 : 0.5);
            const double fk = f(k);
            if (fk < (outside ? fr : fw)) {
                s[o[2]] = k; v[o[2]] = fk;
            } else {
                for (int idx : {o[1], o[2]}) {
                    s[idx] = Vec2{b[0] + 0.5 * (s[idx][0] - b[0]), b[1] + 0.5 * (s[idx][1] - b[1])};
                    v[idx] = f(s[idx]);
                }
            }
        }
    }
    const auto best = std::min_element(v.begin(), v.end()) - v.begin();
    out.best = s[static_cast<std::size_t>(best)];
    out.value = v[static_cast<std::size_t>(best)];
    out.iterations = it;
    return out;
}

}  // namespace

double FitResult::operator()(double x) const { return a / std::pow(x - b, c) + d; }

FitResult fit_inverse_power(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 6) throw std::invalid_argument("fit_inverse_power: need >= 6 paired points");
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < x.size(); ++i) {
        inc = inc && x[i] > x[i - 1];
        dec = dec && x[i] < x[i - 1];
    }
    if (!inc && !dec) throw std::invalid_argument("fit_inverse_power: x must be strictly monotone");

    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const double xs = std::max(std::abs(*xmin_it), std::abs(*xmax_it));
    const double n = static_cast<double>(y.size());
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double var = 0.0;
    for (double v : y) var += (v - ym) * (v - ym);
    const double ys = std::sqrt(var / n);

    FitResult best;
    best.c = 1.0;
    best.b = *xmin_it - (*xmax_it - *xmin_it);
    best.d = ym;
    if (!(ys > 1e-15 * std::max(1.0, std::abs(ym)))) {
        best.rms_residual = std::sqrt(var / n);
        return best;  // nothing to identify
    }

    std::vector<double> X(x.size()), Y(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        X[i] = x[i] / xs;
        Y[i] = (y[i] - ym) / ys;
    }
    const double Xmin = *xmin_it / xs, Xrange = (*xmax_it - *xmin_it) / xs;

    // parameters: u = ln(Xmin - B), v = ln c
    auto objective = [&](const Vec2& p) {
        if (p[1] > std::log(50.0) || p[0] > 20.0) return std::numeric_limits<double>::infinity();
        return project(X, Y, Xmin - std::exp(p[0]), std::exp(p[1])).ssr;
    };

    double best_ssr = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (int c0 = 1; c0 <= 6; ++c0) {
        for (double off : {0.25, 1.0, 4.0}) {
            const Vec2 start{std::log(off * Xrange), std::log(static_cast<double>(c0))};
            auto nm = nelder_mead(objective, start, {0.5, 0.2}, 1e-12, 20000);
            if (!std::isfinite(nm.value)) continue;
            any_converged = any_converged || nm.converged;
            if (nm.value < best_ssr) {
                best_ssr = nm.value;
                const double B = Xmin - std::exp(nm.best[0]);
                const double c = std::exp(nm.best[1]);
                const Projected pr = project(X, Y, B, c);
                best.c = c;
                best.b = B * xs;
                best.a = ys * pr.A * std::pow(xs, c);
                best.d = ys * pr.D + ym;
                best.converged = nm.converged;
                best.iterations = nm.iterations;
                best.best_history = nm.history;
            }
        }
    }
    if (!any_converged) best.converged = false;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = best(x[i]) - y[i];
        ssr += e * e;
    }
    best.rms_residual = std::sqrt(ssr / n);
    return best;
}

}  // namespace casimir
