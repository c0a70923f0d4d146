#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ngtrend::cli {

namespace {

constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 40.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

void render_panel(std::ostringstream& out, const Panel& panel, double top, int width,
                  int height) {
  Range xr, yr;
  for (const Series& s : panel.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.settle();
  yr.settle();
  const double pad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= pad;
  yr.hi += pad;

  const double left = kMarginLeft, right = width - kMarginRight;
  const double y_top = top + kMarginTop, y_bottom = top + height - kMarginBottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left); };
  auto py = [&](double y) { return y_bottom - (y - yr.lo) / (yr.hi - yr.lo) * (y_bottom - y_top); };

  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(y_top) << "\" width=\"" << fmt(right - left)
      << "\" height=\"" << fmt(y_bottom - y_top) << "\" fill=\"none\" stroke=\"#888888\"/>\n";
  out << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top + 18) << "\" font-size=\"14\">"
      << escape(panel.title) << "</text>\n";
  out << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"" << fmt(y_bottom + 32)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(panel.x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << fmt((y_top + y_bottom) / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << fmt((y_top + y_bottom) / 2) << ")\">" << escape(panel.y_label) << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(y_bottom + 14)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    out << "<text x=\"" << fmt(left - 4) << "\" y=\"" << fmt(py(yv) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }

  for (const Series& s : panel.series) {
    std::string d;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) {
        pen_down = false;
        continue;
      }
      d += pen_down ? " L" : (d.empty() ? "M" : " M");
      d += fmt(px(s.x[i])) + ',' + fmt(py(s.y[i]));
      pen_down = true;
    }
    if (d.empty()) continue;
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
        << fmt(s.width) << "\"/>\n";
  }
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int width, int panel_height) {
  std::ostringstream out;
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(panels.size(), 1));
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    render_panel(out, panels[i], static_cast<double>(i) * panel_height, width, panel_height);
  out << "</svg>\n";
  return out.str();
}

}  // namespace ngtrend::cli
