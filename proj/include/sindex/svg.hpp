#pragma once

#include <string>
#include <vector>

namespace sindex {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_lo;  // optional error band
  std::vector<double> y_hi;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

// Static standalone SVG; one polyline per series, optional band polygons,
// decade ticks on log axes.  No external toolkit.
std::string render_svg(const PlotSpec& spec, int width = 640, int height = 440);

// Inverse of the coordinate transform used by render_svg, exposed so tests can
// recover data values from emitted pixel coordinates.
struct PlotTransform {
  double x0, x1, y0, y1;  // data range (log10 when the axis is logarithmic)
  double px0, px1, py0, py1;
  bool log_x, log_y;
  double to_px_x(double x) const;
  double to_px_y(double y) const;
  double from_px_x(double px) const;
  double from_px_y(double py) const;
};
PlotTransform plot_transform(const PlotSpec& spec, int width = 640, int height = 440);

}  // namespace sindex
