#include "casimir/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace casimir {

namespace {

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string format_csv(const std::vector<Column>& cols) {
    std::string out = "#";
    std::size_t rows = 0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out += (i ? "," : "") + cols[i].name;
        rows = std::max(rows, cols[i].values.size());
    }
    out += "\n";
    for (const auto& c : cols)
        if (c.values.size() != rows) throw std::invalid_argument("csv: column length mismatch in " + c.name);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out += ",";
            out += format_number(cols[i].values[r]);
        }
        out += "\n";
    }
    return out;
}

std::string emit_plot(const PlotSpec& plot) {
    if (plot.series.empty()) throw std::invalid_argument("plot: no series");
    const double W = 720, H = 440, L = 80, R = 20, T = 40, B = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ok = [&](double y) { return std::isfinite(y) && (!plot.log_y || y > 0); };
    auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
    std::size_t usable = 0;
    for (const auto& s : plot.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("plot: x/y length mismatch in " + s.name);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!ok(s.y[i]) || !std::isfinite(s.x[i])) continue;
            ++usable;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (usable == 0) throw std::invalid_argument("plot: empty series");
    for (const auto& m : plot.markers) {
        x0 = std::min(x0, m.x);
        x1 = std::max(x1, m.x);
    }
    if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
    if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.04 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        o << "<text x=\"" << svg_num(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
          << tick_label(xv) << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << svg_num(py(yv) + 4) << "\" text-anchor=\"end\">"
          << tick_label(plot.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << escape(plot.y_label) << (plot.log_y ? " [log]" : "") << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* col = palette[k % 6];
        // break the line at non-renderable values
        std::vector<std::string> runs;
        std::string cur;
        int n = 0;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!ok(s.y[i]) || !std::isfinite(s.x[i])) {
                if (n >= 2) runs.push_back(cur);
                cur.clear();
                n = 0;
                continue;
            }
            cur += (n ? " " : "") + svg_num(px(s.x[i])) + "," + svg_num(py(ty(s.y[i])));
            ++n;
        }
        if (n >= 2) runs.push_back(cur);
        for (const auto& r : runs)
            o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.2\" points=\"" << r << "\"/>\n";
        o << "<text x=\"" << W - R - 6 << "\" y=\"" << T + 16 + 14 * static_cast<double>(k)
          << "\" text-anchor=\"end\" fill=\"" << col << "\">" << escape(s.name) << "</text>\n";
    }
    for (const auto& m : plot.markers) {
        const std::string x = svg_num(px(m.x));
        o << "<line x1=\"" << x << "\" y1=\"" << T << "\" x2=\"" << x << "\" y2=\"" << T + 12
          << "\" stroke=\"red\" stroke-width=\"2\"><title>" << escape(m.label) << "</title></line>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << data;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace casimir
