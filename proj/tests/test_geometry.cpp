#include <doctest.h>

#include <regex>

#include "orbitcount/errors.hpp"
#include "orbitcount/geometry.hpp"

using namespace orbitcount;

namespace {

std::vector<orbit::Int> positive_curvatures(const geometry::CircleSet& s) {
  std::vector<orbit::Int> k;
  for (const auto& c : s.circles) {
    if (c.curvature > 0) k.push_back(c.curvature);
  }
  std::sort(k.begin(), k.end());
  return k;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("root placement satisfies the complex Descartes relations") {
    for (const orbit::Quadruple r : {orbit::Quadruple{-1, 2, 2, 3}, orbit::Quadruple{-2, 3, 6, 7},
                                     orbit::Quadruple{0, 0, 1, 1}}) {
      const auto q = geometry::place_root(r);
      CHECK(q.descartes_residual() <= 1e-12);
    }
    CHECK_THROWS_AS(geometry::place_root({1, 1, 1, 1}), ConfigError);
  }

  TEST_CASE("circles match the curvature count and are tangent") {
    for (const orbit::Quadruple r : {orbit::Quadruple{-1, 2, 2, 3}, orbit::Quadruple{-6, 10, 15, 19}}) {
      const auto set = geometry::packing_circles(r, 500, false, true);
      CHECK(positive_curvatures(set) == orbit::enumerate_circles(r, 500).curvatures);
      CHECK(set.max_tangency_residual <= 1e-3);
      CHECK(set.max_descartes_residual <= 1e-9);
      CHECK(set.bounding_radius == doctest::Approx(1.0 / -r[0]));
    }
  }

  TEST_CASE("circles have disjoint interiors inside the bounding circle") {
    const auto set = geometry::packing_circles({-1, 2, 2, 3}, 60, false, false);
    const auto& cs = set.circles;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      CHECK(std::abs(cs[i].center()) + cs[i].radius() <= 1.0 + 1e-9);
      for (std::size_t j = i + 1; j < cs.size(); ++j) {
        const double d = std::abs(cs[i].center() - cs[j].center());
        CHECK(d >= cs[i].radius() + cs[j].radius() - 1e-9);
      }
    }
  }

  TEST_CASE("periodic strip") {
    const auto set = geometry::packing_circles({0, 0, 1, 1}, 100, true, false);
    CHECK(set.periodic);
    CHECK(set.strip_half_width == doctest::Approx(1.0));
    orbit::CircleOptions o;
    o.periodic = true;
    CHECK(positive_curvatures(set) == orbit::enumerate_circles({0, 0, 1, 1}, 100, o).curvatures);
    for (const auto& c : set.circles) {
      if (c.curvature > 0) CHECK(std::abs(c.center().imag()) + c.radius() <= 1.0 + 1e-9);
    }
    CHECK(set.max_tangency_residual <= 1e-3);
  }

  TEST_CASE("svg output") {
    const auto set = geometry::packing_circles({-1, 2, 2, 3}, 50, false, true);
    geometry::SvgOptions opt;
    opt.width_px = 400;
    opt.min_radius_px = 0.0;
    const std::string svg = geometry::render_svg(set, opt);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    const std::regex circle("<circle ");
    const auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), circle), std::sregex_iterator());
    CHECK(static_cast<std::size_t>(n) == set.circles.size());
    // Raising the pixel cutoff drops the small circles.
    opt.min_radius_px = 10.0;
    const std::string coarse = geometry::render_svg(set, opt);
    CHECK(coarse.size() < svg.size());
    // Deterministic.
    CHECK(geometry::render_svg(set, opt) == coarse);
  }

  TEST_CASE("empty packing renders an empty picture") {
    geometry::CircleSet empty;
    const std::string svg = geometry::render_svg(empty);
    CHECK(svg.find("<circle") == std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}
