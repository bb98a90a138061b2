#pragma once

#include <string>
#include <vector>

namespace fkn::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Round-number tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

/// Static 960x540 SVG line chart, one polyline per series.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& opts);

}  // namespace fkn::svg
