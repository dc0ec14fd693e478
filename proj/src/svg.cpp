#include "gpbound/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gpbound {

namespace {

constexpr const char* kFont = "Helvetica, Arial, sans-serif";

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

void widen(Range& range) {
  if (range.hi <= range.lo) {
    const double pad = std::max(1.0, std::abs(range.lo)) * 0.1;
    range.lo -= pad;
    range.hi += pad;
  } else {
    const double pad = (range.hi - range.lo) * 0.04;
    range.lo -= pad;
    range.hi += pad;
  }
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  const double base = raw / magnitude;
  double factor = 10.0;
  if (base <= 1.0) factor = 1.0;
  else if (base <= 2.0) factor = 2.0;
  else if (base <= 5.0) factor = 5.0;
  return factor * magnitude;
}

std::vector<double> linear_ticks(const Range& range) {
  const double step = nice_step(range.hi - range.lo);
  std::vector<double> ticks;
  double tick = std::ceil(range.lo / step) * step;
  for (; tick <= range.hi + 1e-9 * step; tick += step) {
    ticks.push_back(std::abs(tick) < 1e-12 * step ? 0.0 : tick);
  }
  return ticks;
}

std::vector<double> log_ticks(const Range& range) {
  std::vector<double> ticks;
  const int lo = static_cast<int>(std::floor(range.lo + 1e-9));
  const int hi = static_cast<int>(std::ceil(range.hi - 1e-9));
  for (int k = lo; k <= hi; ++k) {
    if (k >= range.lo - 1e-9 && k <= range.hi + 1e-9) ticks.push_back(static_cast<double>(k));
  }
  return ticks;
}

// Maps data coordinates to pixel coordinates inside the plot rectangle.
struct Axis {
  Range range;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;
  bool log_scale = false;
  bool flip = false;  // SVG y grows downward

  double to_pixel(double value) const {
    const double v = log_scale ? std::log10(value) : value;
    double t = (v - range.lo) / (range.hi - range.lo);
    if (flip) t = 1.0 - t;
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
  bool valid(double value) const {
    return std::isfinite(value) && (!log_scale || value > 0.0);
  }
};

void expand(Range& range, double value, bool log_scale, bool& seen) {
  if (!std::isfinite(value) || (log_scale && value <= 0.0)) return;
  const double v = log_scale ? std::log10(value) : value;
  if (!seen) {
    range.lo = range.hi = v;
    seen = true;
  } else {
    range.lo = std::min(range.lo, v);
    range.hi = std::max(range.hi, v);
  }
}

std::string manifest_comment(const std::vector<std::string>& lines) {
  std::string out = "<!--\n";
  for (std::string line : lines) {
    size_t pos;
    while ((pos = line.find("--")) != std::string::npos) line.replace(pos, 2, "- -");
    out += "  " + line + "\n";
  }
  out += "-->\n";
  return out;
}

void draw_polyline(std::ostringstream& svg, const Axis& x_axis, const Axis& y_axis,
                   const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const std::string& color,
                   double width, bool dashed) {
  const std::string dash = dashed ? " stroke-dasharray=\"7 4\"" : "";
  std::ostringstream points;
  int count = 0;
  const auto flush = [&]() {
    if (count >= 2) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width)
          << "\"" << dash << " points=\"" << points.str() << "\"/>\n";
    }
    points.str("");
    count = 0;
  };
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    if (!x_axis.valid(xs[i]) || !y_axis.valid(ys[i])) {
      flush();
      continue;
    }
    points << num(x_axis.to_pixel(xs[i])) << "," << num(y_axis.to_pixel(ys[i])) << " ";
    ++count;
  }
  flush();
}

std::string tick_label(double tick, bool log_scale) {
  return num(log_scale ? std::pow(10.0, tick) : tick);
}

void draw_frame_and_ticks(std::ostringstream& svg, const Axis& x_axis, const Axis& y_axis,
                          double left, double right, double top, double bottom) {
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
      << "\" height=\"" << num(bottom - top)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  const auto x_ticks = x_axis.log_scale ? log_ticks(x_axis.range) : linear_ticks(x_axis.range);
  for (const double tick : x_ticks) {
    const double px = x_axis.pixel_lo +
                      (tick - x_axis.range.lo) / (x_axis.range.hi - x_axis.range.lo) *
                          (x_axis.pixel_hi - x_axis.pixel_lo);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(bottom) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << num(px) << "\" y=\"" << num(bottom + 16)
        << "\" font-family=\"" << kFont << "\" font-size=\"11\" text-anchor=\"middle\">"
        << escape_xml(tick_label(tick, x_axis.log_scale)) << "</text>\n";
  }
  const auto y_ticks = y_axis.log_scale ? log_ticks(y_axis.range) : linear_ticks(y_axis.range);
  for (const double tick : y_ticks) {
    const double py = y_axis.pixel_lo +
                      (1.0 - (tick - y_axis.range.lo) / (y_axis.range.hi - y_axis.range.lo)) *
                          (y_axis.pixel_hi - y_axis.pixel_lo);
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(py) << "\" x2=\"" << num(right)
        << "\" y2=\"" << num(py) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py + 4)
        << "\" font-family=\"" << kFont << "\" font-size=\"11\" text-anchor=\"end\">"
        << escape_xml(tick_label(tick, y_axis.log_scale)) << "</text>\n";
  }
}

void draw_labels(std::ostringstream& svg, const std::string& title, const std::string& x_label,
                 const std::string& y_label, double left, double right, double top, double bottom,
                 int height) {
  if (!title.empty()) {
    svg << "<text x=\"" << num((left + right) / 2.0) << "\" y=\"" << num(top - 10)
        << "\" font-family=\"" << kFont << "\" font-size=\"14\" text-anchor=\"middle\">"
        << escape_xml(title) << "</text>\n";
  }
  if (!x_label.empty()) {
    svg << "<text x=\"" << num((left + right) / 2.0) << "\" y=\"" << num(bottom + 34)
        << "\" font-family=\"" << kFont << "\" font-size=\"12\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n";
  }
  if (!y_label.empty()) {
    svg << "<text x=\"14\" y=\"" << num(height / 2.0) << "\" font-family=\"" << kFont
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num(height / 2.0) << ")\">" << escape_xml(y_label) << "</text>\n";
  }
}

struct Rgb {
  double r, g, b;
};

// Compact perceptual ramp, dark blue to yellow.
Rgb colormap(double t) {
  static const Rgb stops[] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98},
                              {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double s = t - i;
  return {stops[i].r + s * (stops[i + 1].r - stops[i].r),
          stops[i].g + s * (stops[i + 1].g - stops[i].g),
          stops[i].b + s * (stops[i + 1].b - stops[i].b)};
}

std::string color_hex(const Rgb& c) {
  char buffer[8];
  std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
  return buffer;
}

}  // namespace

std::string line_chart(const std::vector<SvgSeries>& series, const ChartOptions& options,
                       const std::vector<std::string>& manifest_lines) {
  if (series.empty()) {
    throw std::invalid_argument("svg: at least one series required");
  }
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw std::invalid_argument("svg: series " + s.label + " has mismatched x and y sizes");
    }
  }
  const double left = 64, right_margin = 18, top = 40, bottom_margin = 52;
  const double right = options.width - right_margin;
  const double bottom = options.height - bottom_margin;

  Range x_range, y_range;
  bool x_seen = false, y_seen = false;
  for (const auto& s : series) {
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      const bool usable = std::isfinite(s.x[i]) && std::isfinite(s.y[i]) &&
                          (!options.log_x || s.x[i] > 0.0) && (!options.log_y || s.y[i] > 0.0);
      if (!usable) continue;
      expand(x_range, s.x[i], options.log_x, x_seen);
      expand(y_range, s.y[i], options.log_y, y_seen);
    }
  }
  widen(x_range);
  widen(y_range);

  Axis x_axis{x_range, left, right, options.log_x, false};
  Axis y_axis{y_range, top, bottom, options.log_y, true};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << manifest_comment(manifest_lines);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << " " << options.height
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  draw_frame_and_ticks(svg, x_axis, y_axis, left, right, top, bottom);
  for (const auto& s : series) {
    draw_polyline(svg, x_axis, y_axis, s.x, s.y, s.color, s.width, s.dashed);
  }
  draw_labels(svg, options.title, options.x_label, options.y_label, left, right, top, bottom,
              options.height);

  double legend_y = top + 16;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    const double lx = right - 150;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(legend_y - 4) << "\" x2=\""
        << num(lx + 24) << "\" y2=\"" << num(legend_y - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"" << num(s.width) << "\""
        << (s.dashed ? " stroke-dasharray=\"7 4\"" : "") << "/>\n";
    svg << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(legend_y) << "\" font-family=\""
        << kFont << "\" font-size=\"11\">" << escape_xml(s.label) << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string heatmap(const Eigen::MatrixXd& values, const Domain& extent,
                    const HeatmapOptions& options, const std::vector<OverlayPoints>& points,
                    const std::vector<OverlayPath>& paths,
                    const std::vector<std::string>& manifest_lines) {
  if (extent.dimension() != 2) {
    throw std::invalid_argument("svg: heatmap extent must be two-dimensional");
  }
  if (values.rows() < 1 || values.cols() < 1) {
    throw std::invalid_argument("svg: heatmap needs at least one cell");
  }
  const double left = 64, top = 40, bottom_margin = 52, bar_width = 16, bar_gap = 14;
  const double right = options.width - 78;
  const double bottom = options.height - bottom_margin;

  Axis x_axis{{extent.lower()[0], extent.upper()[0]}, left, right, false, false};
  Axis y_axis{{extent.lower()[1], extent.upper()[1]}, top, bottom, false, true};

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (std::isfinite(values(i, j))) {
        vmin = std::min(vmin, values(i, j));
        vmax = std::max(vmax, values(i, j));
      }
    }
  }
  if (!std::isfinite(vmin)) {
    vmin = 0.0;
    vmax = 1.0;
  }
  if (vmax <= vmin) vmax = vmin + 1.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << manifest_comment(manifest_lines);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << " " << options.height
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  const int nx = static_cast<int>(values.cols());
  const int ny = static_cast<int>(values.rows());
  const double cell_w = (right - left) / nx;
  const double cell_h = (bottom - top) / ny;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = values(iy, ix);
      const std::string fill =
          std::isfinite(v) ? color_hex(colormap((v - vmin) / (vmax - vmin))) : "#cccccc";
      const double px = left + ix * cell_w;
      const double py = bottom - (iy + 1) * cell_h;
      svg << "<rect x=\"" << num(px) << "\" y=\"" << num(py) << "\" width=\""
          << num(cell_w + 0.5) << "\" height=\"" << num(cell_h + 0.5) << "\" fill=\"" << fill
          << "\"/>\n";
    }
  }

  draw_frame_and_ticks(svg, x_axis, y_axis, left, right, top, bottom);
  for (const auto& path : paths) {
    if (path.points.cols() != 2) {
      throw std::invalid_argument("svg: overlay path rows must be (x, y)");
    }
    draw_polyline(svg, x_axis, y_axis, path.points.col(0), path.points.col(1), path.color,
                  path.width, path.dashed);
  }
  for (const auto& overlay : points) {
    if (overlay.points.cols() != 2) {
      throw std::invalid_argument("svg: overlay point rows must be (x, y)");
    }
    for (Eigen::Index i = 0; i < overlay.points.rows(); ++i) {
      if (!x_axis.valid(overlay.points(i, 0)) || !y_axis.valid(overlay.points(i, 1))) continue;
      svg << "<circle cx=\"" << num(x_axis.to_pixel(overlay.points(i, 0))) << "\" cy=\""
          << num(y_axis.to_pixel(overlay.points(i, 1))) << "\" r=\"" << num(overlay.radius)
          << "\" fill=\"" << overlay.color << "\"/>\n";
    }
  }
  draw_labels(svg, options.title, options.x_label, options.y_label, left, right, top, bottom,
              options.height);

  const double bar_x = right + bar_gap;
  const int bands = 64;
  for (int b = 0; b < bands; ++b) {
    const double t0 = static_cast<double>(b) / bands;
    const double py = bottom - (bottom - top) * (b + 1.0) / bands;
    svg << "<rect x=\"" << num(bar_x) << "\" y=\"" << num(py) << "\" width=\"" << num(bar_width)
        << "\" height=\"" << num((bottom - top) / bands + 0.5) << "\" fill=\""
        << color_hex(colormap(t0 + 0.5 / bands)) << "\"/>\n";
  }
  svg << "<rect x=\"" << num(bar_x) << "\" y=\"" << num(top) << "\" width=\"" << num(bar_width)
      << "\" height=\"" << num(bottom - top)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  for (const double frac : {0.0, 0.5, 1.0}) {
    const double value = vmin + frac * (vmax - vmin);
    const double py = bottom - frac * (bottom - top);
    svg << "<text x=\"" << num(bar_x + bar_width + 4) << "\" y=\"" << num(py + 4)
        << "\" font-family=\"" << kFont << "\" font-size=\"11\">" << escape_xml(num(value))
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gpbound
