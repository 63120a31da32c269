#include "sindex/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace sindex {

namespace {

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 150.0;  // legend column
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 44.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

}  // namespace

double PlotTransform::to_px_x(double x) const {
  const double t = log_x ? std::log10(x) : x;
  return px0 + (t - x0) / (x1 - x0) * (px1 - px0);
}
double PlotTransform::to_px_y(double y) const {
  const double t = log_y ? std::log10(y) : y;
  return py0 + (t - y0) / (y1 - y0) * (py1 - py0);
}
double PlotTransform::from_px_x(double px) const {
  const double t = x0 + (px - px0) / (px1 - px0) * (x1 - x0);
  return log_x ? std::pow(10.0, t) : t;
}
double PlotTransform::from_px_y(double py) const {
  const double t = y0 + (py - py0) / (py1 - py0) * (y1 - y0);
  return log_y ? std::pow(10.0, t) : t;
}

PlotTransform plot_transform(const PlotSpec& spec, int width, int height) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  auto eat_y = [&](double v) {
    if (spec.log_y && v <= 0.0) return;
    const double t = spec.log_y ? std::log10(v) : v;
    y_min = std::min(y_min, t);
    y_max = std::max(y_max, t);
  };
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_x && s.x[i] <= 0.0) {
        throw std::invalid_argument("log x axis requires positive x values");
      }
      const double tx = spec.log_x ? std::log10(s.x[i]) : s.x[i];
      x_min = std::min(x_min, tx);
      x_max = std::max(x_max, tx);
      eat_y(s.y[i]);
      if (!s.y_lo.empty()) {
        eat_y(s.y_lo[i]);
        eat_y(s.y_hi[i]);
      }
    }
  }
  if (!(x_min <= x_max) || !(y_min <= y_max)) {
    throw std::invalid_argument("plot has no finite data");
  }
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double pad_y = 0.04 * (y_max - y_min);
  PlotTransform t;
  t.log_x = spec.log_x;
  t.log_y = spec.log_y;
  t.x0 = x_min;
  t.x1 = x_max;
  t.y0 = y_min - pad_y;
  t.y1 = y_max + pad_y;
  t.px0 = kMarginLeft;
  t.px1 = width - kMarginRight;
  t.py0 = height - kMarginBottom;  // y grows downward in SVG
  t.py1 = kMarginTop;
  return t;
}

std::string render_svg(const PlotSpec& spec, int width, int height) {
  if (spec.series.empty()) throw std::invalid_argument("nothing to plot");
  const PlotTransform t = plot_transform(spec, width, height);
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // frame
  out += "<rect x=\"" + fmt(t.px0) + "\" y=\"" + fmt(t.py1) + "\" width=\"" +
         fmt(t.px1 - t.px0) + "\" height=\"" + fmt(t.py0 - t.py1) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";

  auto tick_positions = [](double lo, double hi, bool log_axis) {
    std::vector<double> ticks;
    if (log_axis) {
      for (double p = std::ceil(lo); p <= std::floor(hi) + 1e-9; p += 1.0) {
        ticks.push_back(p);
      }
      if (ticks.empty()) ticks = {lo, hi};
    } else {
      const int n = 5;
      for (int i = 0; i <= n; ++i) ticks.push_back(lo + (hi - lo) * i / n);
    }
    return ticks;
  };

  for (double tx : tick_positions(t.x0, t.x1, t.log_x)) {
    const double px = t.px0 + (tx - t.x0) / (t.x1 - t.x0) * (t.px1 - t.px0);
    const double val = t.log_x ? std::pow(10.0, tx) : tx;
    out += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(t.py0) + "\" x2=\"" + fmt(px) +
           "\" y2=\"" + fmt(t.py0 + 5) + "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(t.py0 + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(val) + "</text>\n";
  }
  for (double ty : tick_positions(t.y0, t.y1, t.log_y)) {
    const double py = t.py0 + (ty - t.y0) / (t.y1 - t.y0) * (t.py1 - t.py0);
    const double val = t.log_y ? std::pow(10.0, ty) : ty;
    out += "<line x1=\"" + fmt(t.px0 - 5) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(t.px0) +
           "\" y2=\"" + fmt(py) + "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + fmt(t.px0 - 8) + "\" y=\"" + fmt(py + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + fmt(val) + "</text>\n";
  }
  out += "<text x=\"" + fmt(0.5 * (t.px0 + t.px1)) + "\" y=\"" + fmt(t.py0 + 34.0) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + spec.x_label + "</text>\n";
  out += "<text x=\"14\" y=\"" + fmt(0.5 * (t.py0 + t.py1)) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt(0.5 * (t.py0 + t.py1)) + ")\">" + spec.y_label + "</text>\n";
  if (!spec.title.empty()) {
    out += "<text x=\"" + fmt(0.5 * (t.px0 + t.px1)) +
           "\" y=\"18\" font-size=\"13\" text-anchor=\"middle\">" + spec.title +
           "</text>\n";
  }

  int color = 0;
  for (const auto& s : spec.series) {
    const char* c = kPalette[color % 8];
    if (!s.y_lo.empty()) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        pts += fmt(t.to_px_x(s.x[i])) + "," + fmt(t.to_px_y(s.y_hi[i])) + " ";
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        pts += fmt(t.to_px_x(s.x[i])) + "," + fmt(t.to_px_y(s.y_lo[i])) + " ";
      }
      out += "<polygon class=\"band\" points=\"" + pts + "\" fill=\"" + c +
             "\" opacity=\"0.15\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += fmt(t.to_px_x(s.x[i])) + "," + fmt(t.to_px_y(s.y[i]));
      if (i + 1 < s.x.size()) pts += " ";
    }
    out += "<polyline class=\"curve\" points=\"" + pts + "\" fill=\"none\" stroke=\"" + c +
           "\" stroke-width=\"1.6\"/>\n";
    const double ly = kMarginTop + 16.0 * color + 10.0;
    out += "<line x1=\"" + fmt(t.px1 + 8) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(t.px1 + 28) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + c +
           "\" stroke-width=\"2\"/>\n";
    out += "<text class=\"legend\" x=\"" + fmt(t.px1 + 32) + "\" y=\"" + fmt(ly) +
           "\" font-size=\"11\">" + s.label + "</text>\n";
    ++color;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sindex
