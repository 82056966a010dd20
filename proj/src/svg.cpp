#include "ascertain/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ascertain {

namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 790.0;
constexpr double kTop = 48.0;
constexpr double kBottom = 460.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<double>& x,
                          const std::vector<PlotSeries>& series) {
  double x_min = INFINITY, x_max = -INFINITY;
  double y_min = INFINITY, y_max = -INFINITY;
  for (double v : x) {
    if (!std::isfinite(v)) continue;
    x_min = std::min(x_min, v);
    x_max = std::max(x_max, v);
  }
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.y.size() && i < x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (!std::isfinite(x_min) || x_max <= x_min) { x_min = 0.0; x_max = 1.0; }
  if (!std::isfinite(y_min) || y_max <= y_min) {
    y_min = std::isfinite(y_min) ? y_min - 0.5 : 0.0;
    y_max = y_min + 1.0;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto sx = [&](double v) {
    return kLeft + (v - x_min) / (x_max - x_min) * (kRight - kLeft);
  };
  auto sy = [&](double v) {
    return kBottom - (v - y_min) / (y_max - y_min) * (kBottom - kTop);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"24\" font-size=\"16\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\">"
      << escape(title) << "</text>\n";

  // axes and ticks
  svg << "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">\n"
      << "<path d=\"M" << kLeft << ' ' << kTop << " V" << kBottom << " H"
      << kRight << "\"/>\n</g>\n";
  svg << "<g font-size=\"11\" font-family=\"sans-serif\" fill=\"#333\">\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double xv = x_min + (x_max - x_min) * i / ticks;
    const double yv = y_min + (y_max - y_min) * i / ticks;
    svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << kBottom << "\" x2=\""
        << sx(xv) << "\" y2=\"" << kBottom + 5
        << "\" stroke=\"#444\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << sx(xv) << "\" y=\"" << kBottom + 18
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n"
        << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(yv) << "\" x2=\""
        << kLeft << "\" y2=\"" << sy(yv)
        << "\" stroke=\"#444\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (kTop + kBottom) / 2 << ")\">" << escape(y_label) << "</text>\n"
      << "</g>\n";

  // series polylines, broken at non-finite points
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<g stroke=\"" << color << "\" stroke-width=\"1.8\" fill=\"none\">\n";
    std::ostringstream path;
    bool in_segment = false;
    for (std::size_t i = 0; i < series[s].y.size() && i < x.size(); ++i) {
      if (!std::isfinite(series[s].y[i]) || !std::isfinite(x[i])) {
        in_segment = false;
        continue;
      }
      path << (in_segment ? " L" : " M") << fmt(sx(x[i])) << ' '
           << fmt(sy(series[s].y[i]));
      in_segment = true;
    }
    svg << "<path d=\"" << path.str() << "\"/>\n</g>\n";
  }

  // legend
  svg << "<g font-size=\"12\" font-family=\"sans-serif\">\n";
  double legend_y = kTop + 14;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<line x1=\"" << kRight - 170 << "\" y1=\"" << legend_y - 4
        << "\" x2=\"" << kRight - 146 << "\" y2=\"" << legend_y - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kRight - 140 << "\" y=\"" << legend_y << "\">"
        << escape(series[s].label) << "</text>\n";
    legend_y += 18;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace ascertain
