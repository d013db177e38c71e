#include "netslice/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace netslice {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_line_chart(std::ostream& os, const ChartSpec& spec) {
  if (spec.series.empty()) throw std::invalid_argument("chart needs at least one series");

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  for (const ChartSeries& s : spec.series) {
    if (s.xs.size() != s.ys.size())
      throw std::invalid_argument("series '" + s.label + "' has mismatched point counts");
    for (double x : s.xs) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
    for (double y : s.ys) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (spec.reference_y) {
    y_min = std::min(y_min, *spec.reference_y);
    y_max = std::max(y_max, *spec.reference_y);
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double left = 64, right = 160, top = 34, bottom = 40;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  const auto px = [&](double x) { return left + pw * (x - x_min) / (x_max - x_min); };
  const auto py = [&](double y) { return top + ph * (1.0 - (y - y_min) / (y_max - y_min)); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(left) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
     << spec.title << "</text>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // axis extremes
  os << "<text x=\"" << num(left - 4) << "\" y=\"" << num(top + ph) << "\" text-anchor=\"end\" "
     << "font-family=\"sans-serif\" font-size=\"10\">" << short_num(y_min) << "</text>\n";
  os << "<text x=\"" << num(left - 4) << "\" y=\"" << num(top + 10) << "\" text-anchor=\"end\" "
     << "font-family=\"sans-serif\" font-size=\"10\">" << short_num(y_max) << "</text>\n";
  os << "<text x=\"" << num(left) << "\" y=\"" << num(spec.height - 14.0)
     << "\" font-family=\"sans-serif\" font-size=\"10\">" << short_num(x_min) << "</text>\n";
  os << "<text x=\"" << num(left + pw) << "\" y=\"" << num(spec.height - 14.0)
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << short_num(x_max)
     << "</text>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(spec.height - 4.0)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << spec.x_label
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << num(top + ph / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
     << "transform=\"rotate(-90 14 " << num(top + ph / 2) << ")\">" << spec.y_label
     << "</text>\n";

  if (spec.reference_y) {
    os << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(*spec.reference_y)) << "\" x2=\""
       << num(left + pw) << "\" y2=\"" << num(py(*spec.reference_y))
       << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
  }

  double legend_y = top + 12;
  for (const ChartSeries& s : spec.series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (i) os << ' ';
      os << num(px(s.xs[i])) << ',' << num(py(s.ys[i]));
    }
    os << "\"/>\n";
    os << "<line x1=\"" << num(left + pw + 8) << "\" y1=\"" << num(legend_y - 4) << "\" x2=\""
       << num(left + pw + 28) << "\" y2=\"" << num(legend_y - 4) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(left + pw + 32) << "\" y=\"" << num(legend_y)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
}

}  // namespace netslice
