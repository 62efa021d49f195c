#pragma once

#include <string>
#include <vector>

namespace entroflow {

// One polyline of a plot.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal standalone SVG line plot: axes with ticks, one polyline per
// series, small legend.  CSV stays the authoritative output; this exists so
// runs can be eyeballed without external tooling.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

}  // namespace entroflow
