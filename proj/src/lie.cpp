#include "orbitcount/lie.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orbitcount/errors.hpp"

namespace orbitcount::lie {

namespace {

Complex cj(Complex z) { return std::conj(z); }

// Change of frame between e-coordinates and the primed frame (e2, e3, e1):
// e_coords = P * primed_coords.
Mat3 frame() {
  Mat3 p;
  p << 0, 0, 1,
       1, 0, 0,
       0, 1, 0;
  return p;
}

Mat3 rz(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0,
       std::sin(a), std::cos(a), 0,
       0, 0, 1;
  return r;
}

Mat3 ry(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a),
       0, 1, 0,
       -std::sin(a), 0, std::cos(a);
  return r;
}

}  // namespace

// ---- MoebiusElement ------------------------------------------------------

MoebiusElement::MoebiusElement() : a_(1.0), b_(0.0), c_(0.0), d_(1.0) {}

MoebiusElement::MoebiusElement(Complex a, Complex b, Complex c, Complex d)
    : a_(a), b_(b), c_(c), d_(d) {
  if (std::abs(a * d - b * c - 1.0) > 1e-12) {
    throw ConfigError("Moebius element is not unimodular");
  }
}

MoebiusElement MoebiusElement::operator*(const MoebiusElement& o) const {
  MoebiusElement r;
  r.a_ = a_ * o.a_ + b_ * o.c_;
  r.b_ = a_ * o.b_ + b_ * o.d_;
  r.c_ = c_ * o.a_ + d_ * o.c_;
  r.d_ = c_ * o.b_ + d_ * o.d_;
  return r;
}

MoebiusElement MoebiusElement::inverse() const {
  MoebiusElement r;
  r.a_ = d_;
  r.b_ = -b_;
  r.c_ = -c_;
  r.d_ = a_;
  return r;
}

bool MoebiusElement::equivalent(const MoebiusElement& o, double tol) const {
  auto close = [tol](const MoebiusElement& x, const MoebiusElement& y, double sign) {
    return std::abs(x.a_ - sign * y.a_) <= tol && std::abs(x.b_ - sign * y.b_) <= tol &&
           std::abs(x.c_ - sign * y.c_) <= tol && std::abs(x.d_ - sign * y.d_) <= tol;
  };
  return close(*this, o, 1.0) || close(*this, o, -1.0);
}

double MoebiusElement::largest_singular_value() const {
  Eigen::Matrix2cd m;
  m << a_, b_, c_, d_;
  return Eigen::JacobiSVD<Eigen::Matrix2cd>(m).singularValues()(0);
}

// ---- LorentzMatrix -------------------------------------------------------

Mat4 minkowski() { return Eigen::Vector4d(1, 1, 1, -1).asDiagonal(); }

LorentzMatrix LorentzMatrix::inverse() const {
  const Mat4 j = minkowski();
  return LorentzMatrix(j * m_.transpose() * j);
}

double LorentzMatrix::form_residual() const {
  const Mat4 j = minkowski();
  return (m_.transpose() * j * m_ - j).cwiseAbs().maxCoeff();
}

LorentzMatrix iota(const MoebiusElement& g) {
  const Complex a = g.a(), b = g.b(), c = g.c(), d = g.d();
  const Complex I(0.0, 1.0);
  const double na = std::norm(a), nb = std::norm(b), nc = std::norm(c), nd = std::norm(d);
  Mat4 m;
  m(0, 0) = na + nd - nb - nc;
  m(0, 1) = (b * cj(a) + a * cj(b) - d * cj(c) - c * cj(d)).real();
  m(0, 2) = (I * (b * cj(a) - a * cj(b) - d * cj(c) + c * cj(d))).real();
  m(0, 3) = na + nb - nc - nd;

  m(1, 0) = (c * cj(a) - d * cj(b) + a * cj(c) - b * cj(d)).real();
  m(1, 1) = (d * cj(a) + c * cj(b) + b * cj(c) + a * cj(d)).real();
  m(1, 2) = (I * (d * cj(a) - c * cj(b) + b * cj(c) - a * cj(d))).real();
  m(1, 3) = (c * cj(a) + d * cj(b) + a * cj(c) + b * cj(d)).real();

  m(2, 0) = (I * (-c * cj(a) + d * cj(b) + a * cj(c) - b * cj(d))).real();
  m(2, 1) = (I * (-d * cj(a) - c * cj(b) + b * cj(c) + a * cj(d))).real();
  m(2, 2) = (d * cj(a) - c * cj(b) - b * cj(c) + a * cj(d)).real();
  m(2, 3) = (I * (-c * cj(a) - d * cj(b) + a * cj(c) + b * cj(d))).real();

  m(3, 0) = na + nc - nb - nd;
  m(3, 1) = (b * cj(a) + a * cj(b) + d * cj(c) + c * cj(d)).real();
  m(3, 2) = (I * (b * cj(a) - a * cj(b) + d * cj(c) - c * cj(d))).real();
  m(3, 3) = na + nb + nc + nd;
  return LorentzMatrix(0.5 * m);
}

LorentzMatrix boost(double t) { return boost(t, Vec3::UnitX()); }

LorentzMatrix boost(double t, const Vec3& axis) {
  const Vec3 n = axis.normalized();
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() += (std::cosh(t) - 1.0) * n * n.transpose();
  m.topRightCorner<3, 1>() = std::sinh(t) * n;
  m.bottomLeftCorner<1, 3>() = std::sinh(t) * n.transpose();
  m(3, 3) = std::cosh(t);
  return LorentzMatrix(m);
}

LorentzMatrix embed_rotation(const Mat3& r) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  return LorentzMatrix(m);
}

double lorentz_norm(const LorentzMatrix& L) {
  const double c = std::max(L(3, 3), 1.0);
  return c + std::sqrt((c - 1.0) * (c + 1.0));
}

double hyperbolic_distance(const LorentzMatrix& L) { return std::acosh(std::max(L(3, 3), 1.0)); }

// ---- rotations -----------------------------------------------------------

Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

SphericalAngles spherical_angles(const Vec3& v) {
  const Vec3 u = v.normalized();
  const double theta = std::acos(std::clamp(u(0), -1.0, 1.0));
  const double phi = (std::abs(u(1)) + std::abs(u(2)) == 0.0) ? 0.0 : std::atan2(u(2), u(1));
  return {theta, phi};
}

Vec3 unit_vector(double theta, double phi) {
  return Vec3(std::cos(theta), std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi));
}

Mat3 rotation_from_euler(const EulerAngles& e) {
  const Mat3 p = frame();
  return p * rz(e.alpha) * ry(e.beta) * rz(e.gamma) * p.transpose();
}

EulerAngles euler_angles(const Mat3& r) {
  const Mat3 p = frame();
  const Mat3 q = p.transpose() * r * p;
  EulerAngles e{};
  e.beta = std::acos(std::clamp(q(2, 2), -1.0, 1.0));
  const double sb = std::hypot(q(0, 2), q(1, 2));
  if (sb > 1e-12) {
    e.alpha = std::atan2(q(1, 2), q(0, 2));
    e.gamma = std::atan2(q(2, 1), -q(2, 0));
  } else if (q(2, 2) > 0) {
    // beta = 0: only alpha + gamma is defined.
    e.alpha = std::atan2(q(1, 0), q(0, 0));
    e.gamma = 0.0;
  } else {
    // beta = pi: only alpha - gamma is defined.
    e.alpha = std::atan2(-q(1, 0), -q(0, 0));
    e.gamma = 0.0;
  }
  return e;
}

Mat3 weyl_element() { return rotation_about(Vec3::UnitZ(), std::numbers::pi); }

// ---- KAK -------------------------------------------------------------------

KAKData kak(const LorentzMatrix& L) {
  if (L(3, 3) - 1.0 <= kDegenerateThreshold) {
    throw DegenerateRotation("kak: element is a pure rotation (t = 0)");
  }
  KAKData out;
  out.t = std::acosh(L(3, 3));
  const double sh = std::sinh(out.t);
  out.dir1 = Vec3(L(0, 3), L(1, 3), L(2, 3)) / sh;
  out.dir2 = Vec3(L(3, 0), L(3, 1), L(3, 2)) / sh;
  out.dir1.normalize();
  out.dir2.normalize();
  const SphericalAngles s1 = spherical_angles(out.dir1);
  out.k1 = rotation_from_euler({s1.phi, s1.theta, 0.0});
  const Mat4 k2full = boost(-out.t).matrix() * embed_rotation(out.k1).inverse().matrix() * L.matrix();
  out.k2 = k2full.topLeftCorner<3, 3>();
  return out;
}

// ---- Descartes form --------------------------------------------------------

Mat4 descartes_gram() { return Mat4::Identity() - 0.5 * Mat4::Ones(); }

Eigen::Matrix4i descartes_gram_doubled() {
  return 2 * Eigen::Matrix4i::Identity() - Eigen::Matrix4i::Ones();
}

Mat4 q_conjugator() {
  Mat4 q;
  q << 1, -1, -1, 1,
       -1, 1, -1, 1,
       -1, -1, 1, 1,
       1, 1, 1, 1;
  return 0.5 * q;
}

Mat4 to_lorentz(const Mat4& s) {
  const Mat4 q = q_conjugator();
  return q * s * q;
}

// ---- Poisson kernel ----------------------------------------------------------

double poisson_kernel(double phi, double theta, double r, double v, double u) {
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError("poisson_kernel: r must lie in [0, 1)");
  const double dot = std::sin(theta) * std::cos(phi) * std::sin(u) * std::cos(v) +
                     std::sin(theta) * std::sin(phi) * std::sin(u) * std::sin(v) +
                     std::cos(theta) * std::cos(u);
  return (1.0 - r * r) / (1.0 - 2.0 * r * dot + r * r);
}

Vec3 hyperboloid_to_ball(const Vec4& x) { return x.head<3>() / (1.0 + x(3)); }

namespace {

Eigen::Quaterniond embed(Complex z) { return Eigen::Quaterniond(z.real(), z.imag(), 0.0, 0.0); }

Eigen::Quaterniond add(const Eigen::Quaterniond& p, const Eigen::Quaterniond& q) {
  return Eigen::Quaterniond(p.w() + q.w(), p.x() + q.x(), p.y() + q.y(), p.z() + q.z());
}

}  // namespace

Eigen::Quaterniond moebius_act(const MoebiusElement& g, const Eigen::Quaterniond& z) {
  // Same orientation as the line model: z -> (a z + c)(b z + d)^{-1}.
  const Eigen::Quaterniond num = add(embed(g.a()) * z, embed(g.c()));
  const Eigen::Quaterniond den = add(embed(g.b()) * z, embed(g.d()));
  return num * den.inverse();
}

Vec3 upper_half_space_to_ball(const Eigen::Quaterniond& z) {
  const Eigen::Quaterniond one(1.0, 0.0, 0.0, 0.0);
  const Eigen::Quaterniond minus_j(0.0, 0.0, -1.0, 0.0);
  const Eigen::Quaterniond num(z.w(), z.x(), z.y() - 1.0, z.z());
  const Eigen::Quaterniond den = add(minus_j * z, one);
  const Eigen::Quaterniond b = num * den.inverse();
  // Basis (1, i, j): the k component vanishes for points of the form x1 + x2 i + y j.
  return Vec3(b.w(), b.x(), b.y());
}

}  // namespace orbitcount::lie
