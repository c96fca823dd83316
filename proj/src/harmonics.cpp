#include "orbitcount/harmonics.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "orbitcount/errors.hpp"

namespace orbitcount::harmonics {

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Jacobi polynomial P_n^{(alpha,beta)}(x) by the three-term recurrence in n.
double jacobi(int n, double alpha, double beta, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
  for (int k = 2; k <= n; ++k) {
    const double s = 2.0 * k + alpha + beta;
    const double c1 = 2.0 * k * (k + alpha + beta) * (s - 2.0);
    const double c2 = (s - 1.0) * (s * (s - 2.0) * x + alpha * alpha - beta * beta);
    const double c3 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * s;
    const double p2 = (c2 * p1 - c3 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace

void validate(const HarmonicIndex& idx) {
  if (idx.a < 0 || std::abs(idx.b) > idx.a || std::abs(idx.c) > idx.a) {
    throw ConfigError("invalid harmonic index (" + std::to_string(idx.a) + "," +
                      std::to_string(idx.b) + "," + std::to_string(idx.c) + ")");
  }
}

void validate(const BisectorIndex& idx) {
  validate(HarmonicIndex{idx.a, idx.b, idx.c});
  validate(HarmonicIndex{idx.ap, idx.bp, idx.c});
}

double wigner_d(int j, int mp, int m, double beta) {
  if (j < 0 || std::abs(m) > j || std::abs(mp) > j) throw ConfigError("wigner_d: invalid indices");
  // Jacobi-polynomial form: reduce to the smallest of j +- m, j +- m'.
  int k = j + m;
  int a = mp - m;
  int lambda = mp - m;
  if (j - m < k) {
    k = j - m;
    a = m - mp;
    lambda = 0;
  }
  if (j + mp < k) {
    k = j + mp;
    a = m - mp;
    lambda = 0;
  }
  if (j - mp < k) {
    k = j - mp;
    a = mp - m;
    lambda = mp - m;
  }
  const int b = 2 * j - 2 * k - a;
  const double log_pref = 0.5 * (log_binomial(2 * j - k, k + a) - log_binomial(k + b, b));
  const double sign = (lambda % 2 == 0) ? 1.0 : -1.0;
  const double half = 0.5 * beta;
  return sign * std::exp(log_pref) * std::pow(std::sin(half), a) * std::pow(std::cos(half), b) *
         jacobi(k, a, b, std::cos(beta));
}

Complex sph_harm(int a, int b, double theta, double phi) {
  validate(HarmonicIndex{a, b, 0});
  return std::sqrt(2.0 * a + 1.0) * wigner_d(a, b, 0, theta) * std::polar(1.0, b * phi);
}

Complex sph_harm(int a, int b, const lie::Vec3& unit) {
  const lie::SphericalAngles s = lie::spherical_angles(unit);
  return sph_harm(a, b, s.theta, s.phi);
}

Complex gen_sph_harm(const HarmonicIndex& idx, double phi, double theta, double phi2) {
  validate(idx);
  return std::sqrt(2.0 * idx.a + 1.0) * wigner_d(idx.a, idx.b, idx.c, theta) *
         std::polar(1.0, idx.b * phi + idx.c * phi2);
}

Complex gen_sph_harm(const HarmonicIndex& idx, const lie::EulerAngles& e) {
  return gen_sph_harm(idx, e.alpha, e.beta, e.gamma);
}

lie::EulerAngles right_factor_angles(const lie::KAKData& k) {
  return lie::euler_angles(k.k2.transpose() * lie::weyl_element());
}

Complex bisector_harmonic(const BisectorIndex& idx, const lie::Vec3& dir1,
                          const lie::EulerAngles& right) {
  validate(idx);
  const lie::SphericalAngles s1 = lie::spherical_angles(dir1);
  const Complex left = gen_sph_harm(HarmonicIndex{idx.ap, idx.bp, idx.c}, s1.phi, s1.theta, 0.0);
  const Complex rhs = gen_sph_harm(HarmonicIndex{idx.a, idx.b, -idx.c}, right);
  return left * std::conj(rhs);
}

Complex bisector_harmonic(const BisectorIndex& idx, const lie::KAKData& k) {
  validate(idx);
  if (idx.c != 0 && std::cosh(k.t) - 1.0 <= lie::kDegenerateThreshold) {
    throw DegenerateRotation("bisector_harmonic: gauge-dependent value for c != 0 at t = 0");
  }
  if (idx.c == 0) {
    return sph_harm(idx.ap, idx.bp, k.dir1) * std::conj(sph_harm(idx.a, idx.b, lie::Vec3(-k.dir2)));
  }
  const Complex left = gen_sph_harm(HarmonicIndex{idx.ap, idx.bp, idx.c}, lie::euler_angles(k.k1));
  return left * std::conj(gen_sph_harm(HarmonicIndex{idx.a, idx.b, -idx.c}, right_factor_angles(k)));
}

}  // namespace orbitcount::harmonics
