#pragma once

#include <string>
#include <vector>

namespace ascertain {

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // same length as x; NaN points are skipped
};

// Minimal standalone line chart. Series are drawn in order with a fixed
// palette and labeled in a legend.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<double>& x,
                          const std::vector<PlotSeries>& series);

}  // namespace ascertain
