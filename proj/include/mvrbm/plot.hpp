#pragma once

// Minimal SVG line plots for the experiment curves. The CSVs are the real
// output contract; these exist for quick visual checks only.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace mvrbm {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                                const std::string& x_label, const std::string& y_label,
                                std::span<const PlotSeries> series) {
  const double width = 640, height = 420;
  const double left = 64, right = 16, top = 36, bottom = 44;
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (x_min > x_max) {
    x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;
  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (width - left - right); };
  auto sy = [&](double y) {
    return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
  };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf"};
  std::ofstream out(path, std::ios::binary);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  // axes plus four ticks per side
  out << "<g stroke=\"#444\" fill=\"none\"><path d=\"M" << left << ' ' << top << " V"
      << height - bottom << " H" << width - right << "\"/></g>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4.0;
    const double fy = y_min + (y_max - y_min) * t / 4.0;
    out << "<text x=\"" << sx(fx) << "\" y=\"" << height - bottom + 16
        << "\" text-anchor=\"middle\" fill=\"#444\">" << detail::svg_num(fx) << "</text>\n"
        << "<text x=\"" << left - 6 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" fill=\"#444\">" << detail::svg_num(fy) << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" fill=\"#444\">" << x_label << "</text>\n"
      << "<text x=\"14\" y=\"" << (top + height - bottom) / 2
      << "\" text-anchor=\"middle\" fill=\"#444\" transform=\"rotate(-90 14 "
      << (top + height - bottom) / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = palette[si % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[si].x.size(); ++i)
      out << detail::svg_num(sx(series[si].x[i])) << ',' << detail::svg_num(sy(series[si].y[i]))
          << ' ';
    out << "\"/>\n<text x=\"" << width - right - 8 << "\" y=\"" << top + 16 + 16 * si
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << series[si].label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mvrbm
