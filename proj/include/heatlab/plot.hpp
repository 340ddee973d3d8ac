#pragma once

#include <optional>
#include <string>
#include <vector>

namespace heatlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = false;  // polyline through the points in addition to markers
};

/// y = exp(intercept) x^slope on log-log axes.
struct PlotFit {
  double slope = 0.0;
  double intercept = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
};

struct PlotSpec {
  std::string title;
  /// Emitted as the SVG <desc> element when non-empty.
  std::string description;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  std::vector<PlotSeries> series;
  std::optional<PlotFit> fit;
};

/// Self-contained SVG.  Output depends only on the spec (fixed number
/// formatting, no timestamps).  Non-positive values are dropped on log axes.
std::string render_svg(const PlotSpec& spec);

}  // namespace heatlab
