#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "gpbound/domain.hpp"

namespace gpbound {

struct SvgSeries {
  std::string label;
  std::string color = "#1f6fb2";
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double width = 1.8;
  bool dashed = false;
};

struct ChartOptions {
  int width = 760;
  int height = 430;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

// Self-contained line chart; non-finite samples (and non-positive ones on a
// log axis) break the polyline.  The manifest lines go into a leading XML
// comment.
std::string line_chart(const std::vector<SvgSeries>& series, const ChartOptions& options,
                       const std::vector<std::string>& manifest_lines);

struct OverlayPoints {
  std::string label;
  std::string color = "#d62728";
  Eigen::MatrixXd points;  // rows are (x, y)
  double radius = 2.4;
};

struct OverlayPath {
  std::string label;
  std::string color = "#ffffff";
  Eigen::MatrixXd points;  // rows are (x, y)
  double width = 1.8;
  bool dashed = false;
};

struct HeatmapOptions {
  int width = 700;
  int height = 560;
  std::string title;
  std::string x_label;
  std::string y_label;
};

// Cell grid over a rectangle: values(iy, ix) colors the cell with x index ix
// and y index iy, y growing upward.  NaN cells are drawn gray.
std::string heatmap(const Eigen::MatrixXd& values, const Domain& extent,
                    const HeatmapOptions& options, const std::vector<OverlayPoints>& points,
                    const std::vector<OverlayPath>& paths,
                    const std::vector<std::string>& manifest_lines);

}  // namespace gpbound
