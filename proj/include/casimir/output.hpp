#pragma once

#include <string>
#include <vector>

namespace casimir {

struct Column {
    std::string name;  // "x_S(m)"
    std::vector<double> values;
};

// Comma-separated, 17 significant digits, one '#' header line.
std::string format_csv(const std::vector<Column>& cols);
std::string format_number(double v);

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

struct PlotMarker {
    double x;
    std::string label;
};

struct PlotSpec {
    std::string title;
    std::string x_label;  // carries the unit, e.g. "time (s)"
    std::string y_label;
    bool log_y = false;
    std::vector<PlotSeries> series;
    std::vector<PlotMarker> markers;  // drawn as distinct vertical ticks (pull-in)
};

std::string emit_plot(const PlotSpec& plot);

std::string sha256_hex(const std::string& data);

void write_file(const std::string& path, const std::string& data);
std::string read_file(const std::string& path);

}  // namespace casimir
