#pragma once

// PSL(2,C), SO°(3,1), the isomorphism between them, KAK coordinates and
// the Poisson kernel.
//
// Conventions used throughout the library:
//   * Lorentz matrices act on (x, y, z, w) with form J = diag(1, 1, 1, -1).
//   * The boost a_t acts in the x-w plane, so the basepoint of K/M is e1.
//   * Spherical angles (theta, phi) of a unit vector v use e1 as pole:
//       v = cos(theta) e1 + sin(theta) cos(phi) e2 + sin(theta) sin(phi) e3.
//   * Euler angles (alpha, beta, gamma) of a rotation R mean
//       R = R_{e1}(alpha) R_{e3}(beta) R_{e1}(gamma),
//     i.e. the z-y-z convention in the frame (x', y', z') = (e2, e3, e1).

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace orbitcount::lie {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// L[4][4] - 1 at or below this value means t is treated as zero.
inline constexpr double kDegenerateThreshold = 1e-12;

class MoebiusElement {
 public:
  MoebiusElement();  // identity
  // Throws ConfigError unless |ad - bc - 1| <= 1e-12 (after the caller's scaling).
  MoebiusElement(Complex a, Complex b, Complex c, Complex d);

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  Complex c() const { return c_; }
  Complex d() const { return d_; }

  MoebiusElement operator*(const MoebiusElement& o) const;
  MoebiusElement inverse() const;
  // Equality in PSL(2,C): g and -g are the same element.
  bool equivalent(const MoebiusElement& o, double tol = 1e-12) const;
  double largest_singular_value() const;

 private:
  Complex a_, b_, c_, d_;
};

class LorentzMatrix {
 public:
  LorentzMatrix() : m_(Mat4::Identity()) {}
  explicit LorentzMatrix(const Mat4& m) : m_(m) {}

  const Mat4& matrix() const { return m_; }
  // Zero-based access; (3,3) is the w-w entry.
  double operator()(int i, int j) const { return m_(i, j); }

  LorentzMatrix operator*(const LorentzMatrix& o) const { return LorentzMatrix(m_ * o.m_); }
  // J L^T J, exact for any matrix preserving J.
  LorentzMatrix inverse() const;
  // max |(L^T J L - J)_{ij}|
  double form_residual() const;

 private:
  Mat4 m_;
};

Mat4 minkowski();

LorentzMatrix iota(const MoebiusElement& g);
LorentzMatrix boost(double t);
LorentzMatrix boost(double t, const Vec3& axis);
LorentzMatrix embed_rotation(const Mat3& r);

double lorentz_norm(const LorentzMatrix& L);
double hyperbolic_distance(const LorentzMatrix& L);

// ---- rotations and angles ------------------------------------------------

struct SphericalAngles {
  double theta;
  double phi;
};

struct EulerAngles {
  double alpha;
  double beta;
  double gamma;
};

Mat3 rotation_about(const Vec3& axis, double angle);
SphericalAngles spherical_angles(const Vec3& unit);
Vec3 unit_vector(double theta, double phi);
Mat3 rotation_from_euler(const EulerAngles& e);
EulerAngles euler_angles(const Mat3& r);
// Rotation by pi about e3; maps e1 to -e1 and conjugates R_{e1}(x) to R_{e1}(-x).
Mat3 weyl_element();

// ---- KAK ----------------------------------------------------------------

struct KAKData {
  double t = 0.0;
  Vec3 dir1 = Vec3::UnitX();
  Vec3 dir2 = Vec3::UnitX();
  // k1 carries Euler angle gamma = 0; all of M is absorbed into k2.
  Mat3 k1 = Mat3::Identity();
  Mat3 k2 = Mat3::Identity();
};

// Throws DegenerateRotation when L[4][4] - 1 <= kDegenerateThreshold.
KAKData kak(const LorentzMatrix& L);

// ---- Descartes form --------------------------------------------------------

// Gram matrix of Q_D(v) = |v|^2 - (sum v)^2 / 2.
Mat4 descartes_gram();
// Integer Gram matrix of 2 Q_D.
Eigen::Matrix4i descartes_gram_doubled();
// Symmetric involution with q G_D q = J.
Mat4 q_conjugator();
Mat4 to_lorentz(const Mat4& s);

// ---- Poisson kernel ----------------------------------------------------------

// The ball-model Poisson kernel in spherical coordinates (angles with the
// usual third-axis pole, as written in the ball-model chart).
// Throws ConfigError if r is outside [0, 1).
double poisson_kernel(double phi, double theta, double r, double v, double u);

// Ball point (in the basis 1, i, j) for a Lorentz hyperboloid point.
Vec3 hyperboloid_to_ball(const Vec4& x);

// Upper half-space model as quaternions x + y i + h j.
Eigen::Quaterniond moebius_act(const MoebiusElement& g, const Eigen::Quaterniond& z);
Vec3 upper_half_space_to_ball(const Eigen::Quaterniond& z);

}  // namespace orbitcount::lie
