#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plilab::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

/// Standalone SVG polyline plot, no external references. Non-finite points
/// (and non-positive ones on log axes) are dropped from the polylines.
void write_plot(std::ostream& out, const PlotSpec& spec,
                const std::vector<Series>& series);

}  // namespace plilab::svg
