#pragma once

// Line model of the complementary series pi_s, 1 < s < 2.
//
// Functions are finite sums  sum_j e^{i j alpha} P_j(r) (1 + r^2)^{-(s + n_j)}
// with Laurent polynomials P_j.  Every operator of the Lie algebra maps this
// family into itself, so all identities are checked coefficient by coefficient.
//
// Phase convention: v_{lj} for j >= 0 is the closed-form expression with a
// positive leading factor; v_{l,-m} = (-1)^m conj(v_{lm}).  With the operator
// formulas in polar coordinates this gives
//   R v_{lj} = 2i sqrt((l-j)(l+j+1)) v_{l,j+1},   L v_{lj} = 2i sqrt((l+j)(l-j+1)) v_{l,j-1},
// the three-term h and J+ expansions with real coefficients, and the J-
// expansion with an overall minus sign (lowest term v_{l-1,j-1}).

#include <complex>
#include <map>
#include <utility>
#include <vector>

namespace orbitcount::line {

using Real = long double;
using Coeff = std::complex<Real>;

struct Component {
  int shift = 0;                 // exponent of (1 + r^2) is -(s + shift)
  std::map<int, Coeff> poly;     // power of r -> coefficient
};

class LineFunction {
 public:
  explicit LineFunction(double s) : s_(s) {}

  double s() const { return s_; }
  const std::map<int, Component>& components() const { return comps_; }

  void add_term(int j, int shift, int power, Coeff c);
  LineFunction& operator+=(const LineFunction& o);
  LineFunction& operator-=(const LineFunction& o);
  LineFunction operator+(const LineFunction& o) const;
  LineFunction operator-(const LineFunction& o) const;
  LineFunction scaled(Coeff c) const;

  // Rewrites every component with the given minimal shift (multiplying by powers of 1+r^2).
  LineFunction with_shift_at_least(int shift) const;
  std::complex<double> evaluate(double r, double alpha) const;
  Real max_abs_coeff() const;
  bool is_zero() const { return comps_.empty(); }
  // All powers of each component share one parity.
  bool parity_consistent() const;

 private:
  void add_component(int j, const Component& c, Coeff scale);
  void drop_zeros();

  double s_;
  std::map<int, Component> comps_;
};

struct LineVector {
  double s = 1.5;
  int l = 0;
  int j = 0;
  std::vector<std::pair<int, double>> radial;  // (power, coefficient), normalization included

  LineFunction as_function() const;
};

// Throws ConfigError unless 1 < s < 2 and |j| <= l.
LineVector make_vlj(double s, int l, int j);

enum class Operator { h, ih, R, L, Jplus, Jminus };

LineFunction apply_operator(Operator op, const LineFunction& f);
// Composite elements of the enveloping algebra, expressed through the six operators.
LineFunction casimir(const LineFunction& f);
LineFunction k_casimir(const LineFunction& f);

// Largest coefficient of (a - b) divided by max(1, largest coefficient of a or b).
double residual(const LineFunction& a, const LineFunction& b);

struct LadderReport {
  double R = 0.0;
  double L = 0.0;
  double h = 0.0;
  double Jplus = 0.0;
  double Jminus = 0.0;
  double max() const;
};

LadderReport check_ladder(double s, int l, int j);
double casimir_residual(double s, int l, int j);
double k_casimir_residual(double s, int l, int j);

// (-1)^l pi Gamma(s-1)^2 / (Gamma(l+s) Gamma(s-l-1)): the eigenvalue of the
// intertwining operator on the K-type l (acting on the unnormalized shapes).
double intertwine_const(double s, int l);
// Normalization b_l of v_{ll}.
double vll_normalization(double s, int l);

// <f, v> = integral of f * conj(I v) over the plane; the angular integral is
// done exactly, the radial one by adaptive quadrature.
std::complex<double> inner_product(const LineFunction& f, const LineVector& v);

// <pi(a_t) v_{ac}, v_{a'c}> with pi(a_t) f(z) = e^{st} f(e^t z).
// Throws QuadratureError if the adaptive rule misses its tolerance.
double matrix_coefficient(double s, int a, int ap, int c, double t);

}  // namespace orbitcount::line
