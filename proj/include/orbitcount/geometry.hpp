#pragma once

// Circle geometry for rendering: each circle carries (curvature, curvature * center),
// which transforms under the generators exactly like the curvatures do.
// Straight lines carry their unit normal in the second slot.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "orbitcount/orbit.hpp"

namespace orbitcount::geometry {

using Complex = std::complex<double>;

struct Circle {
  orbit::Int curvature = 0;
  Complex w;                 // curvature * center, or unit normal for a line
  double radius() const;     // 1/|k|; infinity for lines
  Complex center() const;
};

struct AugmentedQuadruple {
  std::array<Circle, 4> c;
  // Residuals of sum w^2 = (sum w)^2 / 2 and sum k w = (sum k)(sum w) / 2.
  double descartes_residual() const;
};

// Places the root configuration: a bounding circle of radius 1/|a| centered at
// the origin, or for (0,0,n,n) the strip |Im z| <= 1/n with circles at 0 and 2/n.
AugmentedQuadruple place_root(const orbit::Quadruple& root);

struct CircleSet {
  std::vector<Circle> circles;
  bool periodic = false;
  double strip_half_width = 0.0;        // periodic packings only
  double bounding_radius = 0.0;         // bounded packings only
  double max_tangency_residual = 0.0;   // relative to the sum (or difference) of radii
  double max_descartes_residual = 0.0;
};

// Same traversal as the circle count, carrying centers along.
CircleSet packing_circles(const orbit::Quadruple& root, orbit::Int T, bool periodic, bool include_bounding);

struct SvgOptions {
  int width_px = 800;
  double min_radius_px = 0.5;   // smaller circles are skipped
  bool labels = false;
};

std::string render_svg(const CircleSet& set, const SvgOptions& opt = {});

}  // namespace orbitcount::geometry
