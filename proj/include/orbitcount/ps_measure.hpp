#pragma once

// Empirical Patterson-Sullivan measures built from group balls, their harmonic
// moments, bisector sums with calibrated main-term predictions, the c_P
// estimate for circle counts and the Poisson-kernel derivative check.

#include <complex>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "orbitcount/harmonics.hpp"
#include "orbitcount/lie.hpp"
#include "orbitcount/orbit.hpp"

namespace orbitcount::ps {

using Complex = std::complex<double>;

// Apollonian critical exponent used when no fitted value is supplied.
inline constexpr double kApollonianDelta = 1.30568;

struct Atom {
  lie::Vec3 dir;
  double weight = 0.0;
};

struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  double s = 0.0;
  double total_weight = 0.0;
};

// Atoms at dir1(gamma) with weight e^{-s t(gamma)}, rescaled to total weight 1.
// Only elements with norm < T enter.  Throws EmptyBall if none do.
EmpiricalMeasure ps_approx(const std::vector<orbit::BallElement>& ball, double s,
                           double T = std::numeric_limits<double>::infinity());

// Deterministic pairwise summation; the block layout does not depend on `workers`.
Complex pairwise_sum(const std::vector<Complex>& v);
double pairwise_sum(const std::vector<double>& v);

Complex moment(const EmpiricalMeasure& m, int a, int b, int workers = 1);

struct MomentTable {
  int amax = 0;
  std::map<std::pair<int, int>, Complex> values;
  Complex at(int a, int b) const;
  // max over entries of |nu(a,-b) - (-1)^b conj(nu(a,b))|
  double reality_residual() const;
};

MomentTable moment_table(const EmpiricalMeasure& m, int amax, int workers = 1);

// Literal sum of the bisector harmonic over the ball elements with norm < T.
Complex bisector_sum(const std::vector<orbit::BallElement>& ball, const harmonics::BisectorIndex& idx,
                     double T, int workers = 1);

struct BisectorSeries {
  harmonics::BisectorIndex index;
  std::vector<std::pair<double, Complex>> samples;   // (T, S(T))
  std::vector<std::pair<double, std::size_t>> counts; // (T, ball count)
};

BisectorSeries bisector_series(const std::vector<orbit::BallElement>& ball,
                               const harmonics::BisectorIndex& idx, const std::vector<double>& Ts,
                               int workers = 1);

// Absolute scale for main-term predictions, fitted on the trivial index:
// count(T) ~ amplitude * T^delta.  The amplitude stands in for
// pi |nu|^2 / (delta (delta - 1)); it is labeled as calibrated wherever reported.
struct Calibration {
  double delta = kApollonianDelta;
  double amplitude = 0.0;
  double T = 0.0;
};

Calibration calibrate(std::size_t count, double T, double delta);

// amplitude * nu(a',b') * conj(nu(a,b)) * T^delta.  Throws ConfigError if c != 0.
Complex main_term_predict(const MomentTable& moments, const harmonics::BisectorIndex& idx,
                          const Calibration& cal, double T);

// ---- geometry of the Apollonian chamber -----------------------------------------

// Unit spacelike normals (Lorentz coordinates) of the four reflecting walls of
// g^{-1} Gamma g, oriented so the basepoint has negative pairing when it lies in
// the open chamber.
std::vector<lie::Vec4> apollonian_walls(const lie::Mat4& g);
// True if g * e4 lies in the open chamber of the Apollonian group.
bool in_chamber(const lie::Mat4& g);

struct SupportReport {
  double max_violation = 0.0;   // largest amount by which an atom leaves its cap
  std::size_t checked = 0;
};

// An element whose leftmost letter is k maps the basepoint beyond wall k, so
// its boundary direction lies in the spherical cap cut out by that wall.
SupportReport support_check(const std::vector<orbit::BallElement>& ball, const lie::Mat4& g);

// Transport of a measure for Gamma to the conjugate g^{-1} Gamma g: each atom
// moves to g^{-1} xi and is reweighted by P(g j, xi)^s.
EmpiricalMeasure conjugate_measure(const EmpiricalMeasure& m, const lie::Mat4& g, double s);

// ---- c_P -------------------------------------------------------------------------

struct CpOptions {
  double delta = kApollonianDelta;
  double ball_T = 2000.0;        // radius of the balls used for the two integrals
  double norm_scale = 1.0;       // the norm is norm_scale * max |entry|
  int excluded_first = -1;       // ideal-triangle restriction (generator 0..3)
  bool periodic = false;
  bool period_restriction = true;
  int workers = 1;
  orbit::BallOptions ball;
};

struct CpPart {
  std::size_t ball_count = 0;
  double amplitude = 0.0;        // ball_count / ball_T^delta
  double cusp_integral = 0.0;    // mean of (|z|^2 + 1)^delta
  double norm_integral = 0.0;    // mean of ||g k u||^{-delta}
  double value = 0.0;            // amplitude * cusp_integral * norm_integral
};

struct CpEstimate {
  double c_P = 0.0;
  CpPart even;
  CpPart odd;
  bool divergence_warning = false;
  std::vector<std::string> notes;
};

// Conjugator h with h (1,0,0,1) = q v (Lorentz coordinates of the root).
lie::Mat4 cusp_conjugator(const orbit::Quadruple& v);

CpEstimate c_P_estimate(const orbit::GeneratorSet& gens, const orbit::Quadruple& root,
                        const CpOptions& opt);

// ---- Poisson kernel derivative -----------------------------------------------------

struct PoissonCheck {
  double max_residual = 0.0;
  double max_reference = 0.0;
  int n_theta = 0;
  int n_phi = 0;
};

// Central differences of P^delta(exp(eps X) j; xi) for X = f and X = if,
// combined into the J+ derivative and compared with -delta sin(theta) e^{i phi}.
PoissonCheck poisson_derivative_check(double delta, int n_theta = 32, int n_phi = 32, double eps = 1e-5);

}  // namespace orbitcount::ps
