#pragma once

#include <string>
#include <vector>

namespace ngtrend::cli {

/// One plotted curve. NaN y values split the curve into separate pieces.
struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#000000";
  double width = 1.0;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Panels are stacked vertically. Coordinates are printed with fixed
/// precision so identical inputs give identical files.
std::string render_svg(const std::vector<Panel>& panels, int width = 800, int panel_height = 320);

}  // namespace ngtrend::cli
