#pragma once

#include <span>
#include <string>
#include <vector>

#include "ringlab/error.hpp"

namespace ringlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct PlotLabels {
  std::string title;
  std::string x;
  std::string y;
  /// Written into the SVG as a comment and a metadata element.
  std::string config_hash;
};

/// Points in the complex plane with centred circles of the given radii.
std::string svg_scatter(std::span<const cplx> points, std::span<const double> circle_radii,
                        const PlotLabels& labels);

/// Line plot; with log axes, non-positive values are dropped.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotLabels& labels,
                          bool log_x = false, bool log_y = false);

}  // namespace ringlab
