#include "trajpred/svg.hpp"

#include "trajpred/error.hpp"

#include <cstdio>

namespace trajpred {

namespace {

constexpr double kPixelsPerMeter = 16.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  Eigen::Vector2d origin;
  double height_m;

  double x(double wx) const { return (wx - origin.x()) * kPixelsPerMeter; }
  double y(double wy) const { return (height_m - (wy - origin.y())) * kPixelsPerMeter; }
};

std::string polyline(const Frame& f, const MatrixX2d& pts, const std::string& cls) {
  std::string out = "<polyline class=\"" + cls + "\" points=\"";
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (i) out += ' ';
    out += num(f.x(pts(i, 0))) + "," + num(f.y(pts(i, 1)));
  }
  return out + "\"/>\n";
}

}  // namespace

std::string render_svg(const PlotScene& scene) {
  require(scene.grid != nullptr, "plot needs an occupancy grid");
  require(static_cast<Eigen::Index>(scene.colliding.size()) == scene.abscissae.cols(),
          "one collision flag per abscissa");
  const OccupancyGrid& g = *scene.grid;
  const Frame f{g.origin, g.height * g.resolution};
  const double w = g.width * g.resolution * kPixelsPerMeter;
  const double h = f.height_m * kPixelsPerMeter;
  const double cell = g.resolution * kPixelsPerMeter;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
                    "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
  out += "<title>" + scene.title + "</title>\n";
  out += "<style>.history{fill:none;stroke:#1f4e9c;stroke-width:2.5}"
         ".truth{fill:none;stroke:#1a8a3a;stroke-width:2.5;stroke-dasharray:6 3}"
         ".sample{fill:none;stroke:#e08a1e;stroke-width:1;stroke-opacity:0.5}"
         ".node{fill:#555;fill-opacity:0.5}.hit{fill:#d0201b}</style>\n";

  out += "<g id=\"occupancy\">\n<rect width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"#ffffff\"/>\n";
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const double v = g.at(i, j);
      if (v <= 0.0) continue;
      const int shade = static_cast<int>(255.0 * (1.0 - std::min(1.0, v)));
      const Eigen::Vector2d c = g.cell_center(i, j);
      out += "<rect x=\"" + num(f.x(c.x()) - cell / 2) + "\" y=\"" + num(f.y(c.y()) - cell / 2) + "\" width=\"" +
             num(cell) + "\" height=\"" + num(cell) + "\" fill=\"rgb(" + std::to_string(shade) + "," +
             std::to_string(shade) + "," + std::to_string(shade) + ")\"/>\n";
    }
  }
  out += "</g>\n<g id=\"samples\">\n";
  for (const auto& s : scene.samples) out += polyline(f, s, "sample");
  out += "</g>\n<g id=\"history\">\n" + polyline(f, scene.history, "history") + "</g>\n";
  out += "<g id=\"truth\">\n" + polyline(f, scene.truth, "truth") + "</g>\n<g id=\"abscissae\">\n";
  for (Eigen::Index k = 0; k < scene.abscissae.cols(); ++k) {
    const bool hit = scene.colliding[static_cast<size_t>(k)];
    out += "<circle class=\"" + std::string(hit ? "hit" : "node") + "\" cx=\"" + num(f.x(scene.abscissae(0, k))) +
           "\" cy=\"" + num(f.y(scene.abscissae(1, k))) + "\" r=\"1.2\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace trajpred
