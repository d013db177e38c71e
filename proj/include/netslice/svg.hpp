#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

// Minimal static SVG line charts for the experiment figures. Output is plain
// text with fixed formatting so identical inputs give byte-identical files.

namespace netslice {

struct ChartSeries {
  std::string label;
  std::string color;  // any SVG color
  std::vector<double> xs;
  std::vector<double> ys;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  std::optional<double> reference_y;  // dashed horizontal guide
  int width = 860;
  int height = 340;
};

void write_line_chart(std::ostream& os, const ChartSpec& spec);

}  // namespace netslice
