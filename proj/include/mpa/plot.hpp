#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "mpa/dataset.hpp"
#include "mpa/geometry.hpp"
#include "mpa/mpa.hpp"

namespace mpa {

struct PlotOptions {
  int width{640};
  int height{480};
  std::string title;
};

/// Axis-aligned data window.
struct PlotBox {
  double xmin, xmax, ymin, ymax;
};

/// Bounding box of the data, widened by 10% of its extent on every side.
PlotBox plot_box(const Dataset& ds);

struct Segment {
  Eigen::Vector2d from;
  Eigen::Vector2d to;
};

/// Part of the line w.x + b = 0 inside the box, if any.
std::optional<Segment> clip_line(const Hyperplane<double>& line, const PlotBox& box);

/// Pixel layout shared by the renderer and anyone reading the SVG back.
struct PlotFrame {
  PlotBox box;
  double left, top, right, bottom;  // plot area in pixels

  Eigen::Vector2d to_pixel(const Eigen::Vector2d& p) const;
  Eigen::Vector2d to_data(const Eigen::Vector2d& px) const;
};

PlotFrame plot_frame(const PlotBox& box, const PlotOptions& options);

/// Scatter of both classes (class 0 circles, class 1 squares), the decision
/// line clipped to the plot box, and the moving points as diamonds.
/// Throws RefuseNon2D unless model and data are both 2-D.
std::string render_svg(const MpaModel<double>& model, const Dataset& ds, const PlotOptions& options = {});

}  // namespace mpa
