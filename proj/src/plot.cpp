#include "mpa/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "mpa/error.hpp"

namespace mpa {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

}  // namespace

PlotBox plot_box(const Dataset& ds) {
  if (ds.rows() == 0) throw Error(ErrorCode::EmptyDataset, "nothing to plot");
  if (ds.cols() != 2) throw Error(ErrorCode::RefuseNon2D, "plots are 2-D only");
  const Eigen::Vector2d lo = ds.features.colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = ds.features.colwise().maxCoeff().transpose();
  Eigen::Vector2d pad = 0.1 * (hi - lo);
  for (int i = 0; i < 2; ++i)
    if (pad(i) == 0) pad(i) = std::max(1.0, 0.1 * std::abs(lo(i)));
  return {lo(0) - pad(0), hi(0) + pad(0), lo(1) - pad(1), hi(1) + pad(1)};
}

std::optional<Segment> clip_line(const Hyperplane<double>& line, const PlotBox& box) {
  if (line.dim() != 2) throw Error(ErrorCode::RefuseNon2D, "only lines can be clipped");
  const double a = line.weights(0), b = line.weights(1), c = line.bias;
  const double tol_x = 1e-12 * std::max(1.0, std::abs(box.xmax) + std::abs(box.xmin));
  const double tol_y = 1e-12 * std::max(1.0, std::abs(box.ymax) + std::abs(box.ymin));
  std::vector<Eigen::Vector2d> hits;
  if (b != 0) {
    for (double x : {box.xmin, box.xmax}) {
      const double y = -(a * x + c) / b;
      if (y >= box.ymin - tol_y && y <= box.ymax + tol_y) hits.emplace_back(x, std::clamp(y, box.ymin, box.ymax));
    }
  }
  if (a != 0) {
    for (double y : {box.ymin, box.ymax}) {
      const double x = -(b * y + c) / a;
      if (x >= box.xmin - tol_x && x <= box.xmax + tol_x) hits.emplace_back(std::clamp(x, box.xmin, box.xmax), y);
    }
  }
  if (hits.size() < 2) return std::nullopt;
  Segment best{hits[0], hits[0]};
  double longest = -1;
  for (std::size_t i = 0; i < hits.size(); ++i)
    for (std::size_t j = i + 1; j < hits.size(); ++j) {
      const double d = (hits[i] - hits[j]).norm();
      if (d > longest) {
        longest = d;
        best = {hits[i], hits[j]};
      }
    }
  if (longest <= 0) return std::nullopt;
  return best;
}

Eigen::Vector2d PlotFrame::to_pixel(const Eigen::Vector2d& p) const {
  return {left + (p(0) - box.xmin) / (box.xmax - box.xmin) * (right - left),
          top + (box.ymax - p(1)) / (box.ymax - box.ymin) * (bottom - top)};
}

Eigen::Vector2d PlotFrame::to_data(const Eigen::Vector2d& px) const {
  return {box.xmin + (px(0) - left) / (right - left) * (box.xmax - box.xmin),
          box.ymax - (px(1) - top) / (bottom - top) * (box.ymax - box.ymin)};
}

PlotFrame plot_frame(const PlotBox& box, const PlotOptions& options) {
  if (options.width < 200 || options.height < 150)
    throw Error(ErrorCode::InvalidParams, "plot must be at least 200x150 pixels");
  return {box, 70.0, 40.0, options.width - 20.0, options.height - 55.0};
}

std::string render_svg(const MpaModel<double>& model, const Dataset& ds, const PlotOptions& options) {
  if (model.dim() != 2) throw Error(ErrorCode::RefuseNon2D, "plots are 2-D only");
  const PlotBox box = plot_box(ds);
  const PlotFrame frame = plot_frame(box, options);

  std::string xlabel = "x1", ylabel = "x2";
  const auto& names = !ds.feature_names.empty() ? ds.feature_names : model.feature_names();
  if (names.size() == 2) {
    xlabel = names[0];
    ylabel = names[1];
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << " " << options.height << "\">\n";
  svg << "<defs><clipPath id=\"plot-area\"><rect x=\"" << num(frame.left) << "\" y=\"" << num(frame.top)
      << "\" width=\"" << num(frame.right - frame.left) << "\" height=\"" << num(frame.bottom - frame.top)
      << "\"/></clipPath></defs>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Exact bounds so readers can invert the pixel mapping.
  svg << "<g id=\"frame\" data-xmin=\"" << detail::format_real(box.xmin) << "\" data-xmax=\""
      << detail::format_real(box.xmax) << "\" data-ymin=\"" << detail::format_real(box.ymin) << "\" data-ymax=\""
      << detail::format_real(box.ymax) << "\">\n";
  svg << "<rect x=\"" << num(frame.left) << "\" y=\"" << num(frame.top) << "\" width=\"" << num(frame.right - frame.left)
      << "\" height=\"" << num(frame.bottom - frame.top) << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = box.xmin + (box.xmax - box.xmin) * i / kTicks;
    const double fy = box.ymin + (box.ymax - box.ymin) * i / kTicks;
    const Eigen::Vector2d px = frame.to_pixel({fx, box.ymin});
    const Eigen::Vector2d py = frame.to_pixel({box.xmin, fy});
    svg << "<text x=\"" << num(px(0)) << "\" y=\"" << num(frame.bottom + 16) << "\" font-size=\"11\" "
        << "text-anchor=\"middle\">" << num(fx) << "</text>\n";
    svg << "<text x=\"" << num(frame.left - 6) << "\" y=\"" << num(py(1) + 4) << "\" font-size=\"11\" "
        << "text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  svg << "<text id=\"xlabel\" x=\"" << num(0.5 * (frame.left + frame.right)) << "\" y=\"" << num(options.height - 12.0)
      << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  svg << "<text id=\"ylabel\" x=\"16\" y=\"" << num(0.5 * (frame.top + frame.bottom))
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(0.5 * (frame.top + frame.bottom)) << ")\">" << escape(ylabel) << "</text>\n";
  if (!options.title.empty())
    svg << "<text id=\"title\" x=\"" << num(0.5 * options.width) << "\" y=\"24\" font-size=\"15\" "
        << "text-anchor=\"middle\">" << escape(options.title) << "</text>\n";
  svg << "</g>\n";

  svg << "<g id=\"class0\" fill=\"#1f77b4\" fill-opacity=\"0.8\">\n";
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    if (ds.labels[static_cast<std::size_t>(i)] != 0) continue;
    const Eigen::Vector2d p = frame.to_pixel(ds.features.row(i).transpose());
    svg << "<circle cx=\"" << num(p(0)) << "\" cy=\"" << num(p(1)) << "\" r=\"3.5\"/>\n";
  }
  svg << "</g>\n";
  svg << "<g id=\"class1\" fill=\"#d62728\" fill-opacity=\"0.8\">\n";
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    if (ds.labels[static_cast<std::size_t>(i)] != 1) continue;
    const Eigen::Vector2d p = frame.to_pixel(ds.features.row(i).transpose());
    svg << "<rect x=\"" << num(p(0) - 3.5) << "\" y=\"" << num(p(1) - 3.5) << "\" width=\"7\" height=\"7\"/>\n";
  }
  svg << "</g>\n";

  if (auto seg = clip_line(model.hyperplane(), box)) {
    const Eigen::Vector2d a = frame.to_pixel(seg->from);
    const Eigen::Vector2d b = frame.to_pixel(seg->to);
    svg << "<line id=\"boundary\" x1=\"" << num(a(0)) << "\" y1=\"" << num(a(1)) << "\" x2=\"" << num(b(0))
        << "\" y2=\"" << num(b(1)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }

  svg << "<g id=\"moving-points\" fill=\"#ff7f0e\" stroke=\"black\" clip-path=\"url(#plot-area)\">\n";
  for (Eigen::Index i = 0; i < model.dim(); ++i) {
    const Eigen::Vector2d p = frame.to_pixel(model.moving_points().row(i).transpose());
    svg << "<path d=\"M " << num(p(0)) << " " << num(p(1) - 7) << " L " << num(p(0) + 7) << " " << num(p(1)) << " L "
        << num(p(0)) << " " << num(p(1) + 7) << " L " << num(p(0) - 7) << " " << num(p(1)) << " Z\"/>\n";
  }
  svg << "</g>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mpa
