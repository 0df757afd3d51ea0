#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gna::harness::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // optional band, same length as y when present
  std::vector<double> hi;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

// Line chart; each series draws its band (if any) under the line.
std::string line_chart(const Axes& axes, const std::vector<Series>& series);

// Scatter of points with an optional fitted line y = slope * x + intercept in plot coordinates
// (log10 coordinates on log axes).
std::string scatter_chart(const Axes& axes, const std::vector<double>& x, const std::vector<double>& y,
                          std::optional<std::pair<double, double>> fit = std::nullopt);

// Row-major heatmap of a rows x cols matrix.
std::string heatmap(const std::string& title, const std::vector<double>& values, std::size_t rows, std::size_t cols);

}  // namespace gna::harness::svg
