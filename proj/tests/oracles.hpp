#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// None of them calls into the code under test beyond plain value types.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

using Complex = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;
using Quad = std::array<std::int64_t, 4>;

// ---- PSL(2,C) -> SO(3,1) through the Hermitian-matrix model -------------------------

// (x, y, z, w) <-> [[w + x, y - i z], [y + i z, w - x]];  g acts by H -> g H g^*.
inline Mat2c hermitian(const Vec4& v) {
  const Complex I(0, 1);
  Mat2c h;
  h << v(3) + v(0), v(1) - I * v(2), v(1) + I * v(2), v(3) - v(0);
  return h;
}

inline Vec4 from_hermitian(const Mat2c& h) {
  return Vec4(0.5 * (h(0, 0) - h(1, 1)).real(), h(0, 1).real(), -h(0, 1).imag(), 0.5 * (h(0, 0) + h(1, 1)).real());
}

inline Mat4 hermitian_iota(const Mat2c& g) {
  Mat4 m;
  for (int k = 0; k < 4; ++k) m.col(k) = from_hermitian(g * hermitian(Vec4::Unit(k)) * g.adjoint());
  return m;
}

// Random element of SL(2,C) with Gaussian entries, rescaled to determinant 1.
inline Mat2c random_sl2c(std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> n(0.0, spread);
  Mat2c g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = Complex(n(rng), n(rng));
  return g / std::sqrt(g.determinant());
}

inline Mat4 minkowski() { return Eigen::Vector4d(1, 1, 1, -1).asDiagonal(); }

// Textbook boost along e1 in the x-w plane.
inline Mat4 boost_x(double t) {
  Mat4 m = Mat4::Identity();
  m(0, 0) = m(3, 3) = std::cosh(t);
  m(0, 3) = m(3, 0) = std::sinh(t);
  return m;
}

// ---- Apollonian words -----------------------------------------------------------------

// S_i replaces entry i by 2 * (sum of the others) - entry i.
inline Quad reflect(const Quad& q, int i) {
  Quad r = q;
  r[i] = 2 * (q[0] + q[1] + q[2] + q[3] - q[i]) - q[i];
  return r;
}

inline Eigen::Matrix<std::int64_t, 4, 4> generator(int i) {
  Eigen::Matrix<std::int64_t, 4, 4> m = Eigen::Matrix<std::int64_t, 4, 4>::Identity();
  for (int k = 0; k < 4; ++k) m(i, k) = 2;
  m(i, i) = -1;
  return m;
}

// 2 Q_D on integers.
inline std::int64_t descartes2(const Quad& q) {
  std::int64_t s = 0, s2 = 0;
  for (auto x : q) {
    s += x;
    s2 += x * x;
  }
  return 2 * s2 - s * s;
}

// Circle count by depth-first search over reduced words.  A branch is followed
// `margin` levels beyond the first curvature above T before it is dropped, so
// any later return below T within that window would be counted.  Periodic
// roots use the one-period convention: one of the two equal circles is a base
// circle and only the zero slots are replaced at the top.
inline std::vector<std::int64_t> brute_force_circles(const Quad& root, std::int64_t T, int margin,
                                                     bool periodic = false, int excluded_first = -1,
                                                     bool include_bounding = false) {
  std::vector<std::int64_t> out;
  std::vector<int> first;
  bool one = false;
  for (int i = 0; i < 4; ++i) {
    if (periodic) {
      if (root[i] == 0) {
        first.push_back(i);
      } else if (!one && root[i] <= T) {
        out.push_back(root[i]);
        one = true;
      }
    } else {
      first.push_back(i);
      if ((root[i] > 0 && root[i] <= T) || (root[i] < 0 && include_bounding)) out.push_back(root[i]);
    }
  }
  struct Node {
    Quad q;
    int last;
    int over;  // levels spent above T
  };
  std::vector<Node> stack;
  auto visit = [&](const Node& parent, int i) {
    Node c{reflect(parent.q, i), i, 0};
    if (c.q[i] > T) {
      c.over = parent.over + 1;
      if (c.over > margin) return;
    } else if (c.q[i] > 0) {
      out.push_back(c.q[i]);
    }
    stack.push_back(c);
  };
  const Node top{root, -1, 0};
  for (int i : first) {
    if (i != excluded_first) visit(top, i);
  }
  while (!stack.empty()) {
    const Node n = stack.back();
    stack.pop_back();
    for (int i = 0; i < 4; ++i) {
      if (i != n.last) visit(n, i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Distinct vectors reachable by words of length <= max_len with L-infinity norm below T,
// restricted to a word-length parity (-1: any).  No pruning at all.
inline std::set<Quad> brute_force_orbit(const Quad& v, double T, int max_len, int parity = -1) {
  std::set<Quad> found;
  std::set<std::pair<Quad, int>> seen{{v, 0}};
  std::vector<std::pair<Quad, int>> level{{v, 0}};
  auto norm = [](const Quad& q) {
    std::int64_t m = 0;
    for (auto x : q) m = std::max<std::int64_t>(m, std::llabs(x));
    return static_cast<double>(m);
  };
  auto consider = [&](const Quad& q, int p) {
    if (norm(q) < T && (parity < 0 || parity == p)) found.insert(q);
  };
  consider(v, 0);
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::pair<Quad, int>> next;
    for (const auto& [q, p] : level) {
      for (int i = 0; i < 4; ++i) {
        const std::pair<Quad, int> c{reflect(q, i), 1 - p};
        if (seen.insert(c).second) {
          consider(c.first, c.second);
          next.push_back(c);
        }
      }
    }
    level = std::move(next);
  }
  return found;
}

// ---- harmonics --------------------------------------------------------------------------

// Orthonormal spherical harmonic with the Condon-Shortley phase, pole e1,
// scaled by sqrt(4 pi): explicit associated Legendre recurrence.
inline double assoc_legendre(int l, int m, double x) {
  // P_l^m(x) for m >= 0 with the Condon-Shortley phase.
  double pmm = 1.0;
  const double s = std::sqrt(std::max(0.0, (1 - x) * (1 + x)));
  double fact = 1.0;
  for (int i = 1; i <= m; ++i) {
    pmm *= -fact * s;
    fact += 2.0;
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2 * m + 1) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2 * ll - 1) * pmmp1 - (ll + m - 1) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

inline Complex ylm(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  const double norm = std::sqrt((2.0 * l + 1) * std::exp(std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0)));
  Complex v = norm * assoc_legendre(l, am, std::cos(theta)) * std::polar(1.0, am * phi);
  if (m < 0) v = ((am % 2) ? -1.0 : 1.0) * std::conj(v);
  return v;
}

// Gauss-Legendre nodes and weights on [-1, 1] (N points).
template <int N>
std::vector<std::pair<double, double>> gauss_legendre() {
  using Q = boost::math::quadrature::gauss<double, N>;
  std::vector<std::pair<double, double>> out;
  const auto& x = Q::abscissa();
  const auto& w = Q::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.emplace_back(x[i], w[i]);
    if (x[i] != 0.0) out.emplace_back(-x[i], w[i]);
  }
  return out;
}

// Gram matrix of the given functions under a product rule: Gauss-Legendre in
// cos(theta) times uniform grids in the remaining angles, normalized to a
// probability measure.  `fns` maps (phi, theta, psi) to a value.
inline Eigen::MatrixXcd gram(const std::vector<std::function<Complex(double, double, double)>>& fns,
                             int n_uniform, bool third_angle) {
  const auto gl = gauss_legendre<24>();
  std::vector<std::array<double, 4>> pts;  // phi, theta, psi, weight
  const int npsi = third_angle ? n_uniform : 1;
  for (const auto& [x, w] : gl) {
    for (int a = 0; a < n_uniform; ++a) {
      for (int c = 0; c < npsi; ++c) {
        pts.push_back({2 * M_PI * a / n_uniform, std::acos(x), 2 * M_PI * c / npsi,
                       w / 2.0 / n_uniform / npsi});
      }
    }
  }
  Eigen::MatrixXcd F(pts.size(), fns.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double sw = std::sqrt(pts[i][3]);
    for (std::size_t k = 0; k < fns.size(); ++k) F(i, k) = sw * fns[k](pts[i][0], pts[i][1], pts[i][2]);
  }
  return F.adjoint() * F;
}

// ---- statistics --------------------------------------------------------------------------

// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace oracle
