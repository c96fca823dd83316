#include "orbitcount/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "orbitcount/errors.hpp"

namespace orbitcount::geometry {

double Circle::radius() const {
  if (curvature == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::abs(static_cast<double>(curvature));
}

Complex Circle::center() const {
  if (curvature == 0) return 0.0;
  return w / static_cast<double>(curvature);
}

double AugmentedQuadruple::descartes_residual() const {
  Complex sw = 0, sw2 = 0, skw = 0;
  double sk = 0;
  for (const Circle& x : c) {
    sw += x.w;
    sw2 += x.w * x.w;
    skw += static_cast<double>(x.curvature) * x.w;
    sk += static_cast<double>(x.curvature);
  }
  const double scale = std::max(1.0, std::abs(sw2));
  return std::max(std::abs(sw2 - 0.5 * sw * sw), std::abs(skw - 0.5 * sk * sw)) / scale;
}

namespace {

// Relative tangency defect between two circles (lines are skipped).
double tangency(const Circle& a, const Circle& b) {
  if (a.curvature == 0 || b.curvature == 0) return 0.0;
  const double d = std::abs(a.center() - b.center());
  const double ra = a.radius(), rb = b.radius();
  double target = ra + rb;
  if (a.curvature < 0) target = ra - rb;
  if (b.curvature < 0) target = rb - ra;
  return std::abs(d - target) / std::min(ra, rb);
}

double quadruple_tangency(const AugmentedQuadruple& q) {
  double r = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) r = std::max(r, tangency(q.c[i], q.c[j]));
  }
  return r;
}

Circle reflect(const AugmentedQuadruple& q, int i) {
  Circle out;
  Complex s = 0;
  __int128 k = 0;
  for (int m = 0; m < 4; ++m) {
    if (m == i) continue;
    s += q.c[m].w;
    k += q.c[m].curvature;
  }
  out.curvature = static_cast<orbit::Int>(2 * k - q.c[i].curvature);
  out.w = 2.0 * s - q.c[i].w;
  return out;
}

}  // namespace

AugmentedQuadruple place_root(const orbit::Quadruple& root) {
  if (!orbit::on_descartes_cone(root)) throw ConfigError("place_root: not a Descartes quadruple");
  AugmentedQuadruple q;
  std::vector<int> zeros, negative, positive;
  for (int i = 0; i < 4; ++i) {
    q.c[i].curvature = root[i];
    if (root[i] == 0) zeros.push_back(i);
    if (root[i] < 0) negative.push_back(i);
    if (root[i] > 0) positive.push_back(i);
  }
  if (zeros.size() == 2 && positive.size() == 2 && root[positive[0]] == root[positive[1]]) {
    const double n = static_cast<double>(root[positive[0]]);
    q.c[zeros[0]].w = Complex(0, 1);
    q.c[zeros[1]].w = Complex(0, -1);
    q.c[positive[0]].w = 0.0;
    q.c[positive[1]].w = n * (2.0 / n);
    return q;
  }
  if (negative.size() != 1 || positive.size() != 3) {
    throw ConfigError("place_root: supported roots are bounded packings or (0,0,n,n)");
  }
  const int ia = negative[0], ib = positive[0], ic = positive[1], id = positive[2];
  const double R = 1.0 / std::abs(static_cast<double>(root[ia]));
  const double rb = 1.0 / static_cast<double>(root[ib]);
  const double rc = 1.0 / static_cast<double>(root[ic]);
  const Complex zb(R - rb, 0.0);
  // Circle c: |z| = R - rc and |z - zb| = rb + rc.
  const double d1 = R - rc, d2 = rb + rc, xb = zb.real();
  double x = (d1 * d1 - d2 * d2 + xb * xb) / (2.0 * xb);
  double y = std::sqrt(std::max(0.0, d1 * d1 - x * x));
  // With the common denominator D = |a| b c every length is an integer over D, so
  // the height is exact up to one final rounding.  The double formula above loses
  // half its digits when the three centers are nearly collinear.
  {
    using I = __int128;
    const I A = -root[ia], B = root[ib], Cc = root[ic];
    const I D = A * B * Cc;
    const I d1n = B * Cc - A * B, d2n = A * Cc + A * B, xbn = B * Cc - A * Cc;
    const double bound = std::pow(2.0, 120);
    const double big = std::max({std::abs(static_cast<double>(d1n)), std::abs(static_cast<double>(d2n)),
                                 std::abs(static_cast<double>(xbn))});
    if (xbn != 0 && 4.0 * std::pow(big, 4) < bound) {
      const I num_x = d1n * d1n - d2n * d2n + xbn * xbn;  // x = num_x / (2 xbn D)
      const I twice = 2 * xbn * d1n;
      const I h2 = twice * twice - num_x * num_x;            // y^2 = h2 / (2 xbn D)^2
      const double den = 2.0 * static_cast<double>(xbn) * static_cast<double>(D);
      x = static_cast<double>(num_x) / den;
      y = h2 > 0 ? std::sqrt(static_cast<double>(h2)) / std::abs(den) : 0.0;
    }
  }
  const Complex zc(x, y);
  q.c[ia].w = 0.0;
  q.c[ib].w = static_cast<double>(root[ib]) * zb;
  q.c[ic].w = static_cast<double>(root[ic]) * zc;
  const Complex s = q.c[ia].w + q.c[ib].w + q.c[ic].w;
  const Complex disc = std::sqrt(q.c[ia].w * q.c[ib].w + q.c[ib].w * q.c[ic].w + q.c[ia].w * q.c[ic].w);
  double best = std::numeric_limits<double>::infinity();
  Complex chosen = s;
  for (double sign : {1.0, -1.0}) {
    AugmentedQuadruple trial = q;
    trial.c[id].w = s + sign * 2.0 * disc;
    const double t = quadruple_tangency(trial);
    if (t < best) {
      best = t;
      chosen = trial.c[id].w;
    }
  }
  q.c[id].w = chosen;
  return q;
}

CircleSet packing_circles(const orbit::Quadruple& root, orbit::Int T, bool periodic, bool include_bounding) {
  if (T <= 0 || static_cast<double>(T) > orbit::kMaxT) throw ConfigError("tmax must lie in (0, 1e12]");
  if (orbit::reducing_generator(root) >= 0) throw NonRootInput("render: root is not reduced");
  const AugmentedQuadruple start = place_root(root);
  CircleSet set;
  set.periodic = periodic;
  const int zeros = static_cast<int>(std::count(root.begin(), root.end(), orbit::Int{0}));
  if (zeros > 0 && !periodic) throw ConfigError("render: periodic root needs the periodic flag");

  std::vector<int> first;
  bool counted = false;
  for (int i = 0; i < 4; ++i) {
    const Circle& c = start.c[i];
    if (periodic) {
      if (c.curvature == 0) {
        first.push_back(i);
      } else if (!counted && c.curvature <= T) {
        set.circles.push_back(c);
        counted = true;
      }
      if (c.curvature > 0) set.strip_half_width = c.radius();
    } else {
      if (c.curvature < 0) set.bounding_radius = c.radius();
      first.push_back(i);
      if ((c.curvature > 0 && c.curvature <= T) || (c.curvature < 0 && include_bounding)) set.circles.push_back(c);
    }
  }
  set.max_descartes_residual = start.descartes_residual();
  set.max_tangency_residual = quadruple_tangency(start);

  struct Node {
    AugmentedQuadruple q;
    int last;
  };
  std::vector<Node> stack;
  auto push_child = [&](const Node& n, int i) {
    Node child{n.q, i};
    child.q.c[i] = reflect(n.q, i);
    if (child.q.c[i].curvature > T) return;
    set.circles.push_back(child.q.c[i]);
    set.max_tangency_residual = std::max(set.max_tangency_residual, quadruple_tangency(child.q));
    set.max_descartes_residual = std::max(set.max_descartes_residual, child.q.descartes_residual());
    stack.push_back(child);
  };
  const Node root_node{start, -1};
  for (int i : first) push_child(root_node, i);
  while (!stack.empty()) {
    const Node n = stack.back();
    stack.pop_back();
    for (int i = 0; i < 4; ++i) {
      if (i != n.last) push_child(n, i);
    }
  }
  return set;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string render_svg(const CircleSet& set, const SvgOptions& opt) {
  // Window in packing coordinates.
  double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
  if (set.periodic && set.strip_half_width > 0) {
    const double h = set.strip_half_width;
    xmin = -h;
    xmax = 3 * h;
    ymin = -h;
    ymax = h;
  } else if (set.bounding_radius > 0) {
    xmin = ymin = -set.bounding_radius;
    xmax = ymax = set.bounding_radius;
  }
  const double scale = opt.width_px / (xmax - xmin);
  const int height = static_cast<int>(std::ceil((ymax - ymin) * scale));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width_px << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << opt.width_px << ' ' << height << "\">\n";
  os << "<g fill=\"none\" stroke=\"black\" stroke-width=\"0.5\">\n";
  auto px = [&](Complex z) {
    return std::make_pair((z.real() - xmin) * scale, (ymax - z.imag()) * scale);
  };
  if (set.periodic && set.strip_half_width > 0) {
    for (double y : {set.strip_half_width, -set.strip_half_width}) {
      const auto [x0, y0] = px(Complex(xmin, y));
      const auto [x1, y1] = px(Complex(xmax, y));
      os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1) << "\" y2=\"" << fmt(y1)
         << "\"/>\n";
    }
  }
  for (const Circle& c : set.circles) {
    if (c.curvature == 0) continue;
    const double r = c.radius() * scale;
    if (r < opt.min_radius_px) continue;
    const auto [cx, cy] = px(c.center());
    os << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r) << "\"/>\n";
    if (opt.labels && c.curvature > 0 && r > 6) {
      os << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(cy) << "\" font-size=\"" << fmt(std::min(r, 24.0))
         << "\" text-anchor=\"middle\" dominant-baseline=\"middle\" fill=\"black\" stroke=\"none\">"
         << c.curvature << "</text>\n";
    }
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace orbitcount::geometry
