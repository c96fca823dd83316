#include "orbitcount/line_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "orbitcount/errors.hpp"

namespace orbitcount::line {

namespace {

using Poly = std::map<int, Coeff>;
const Coeff kI(0.0L, 1.0L);

void poly_add(Poly& dst, const Poly& src, Coeff scale) {
  for (const auto& [p, c] : src) dst[p] += scale * c;
}

Poly poly_mul_r(const Poly& p, int k) {
  Poly out;
  for (const auto& [pw, c] : p) out[pw + k] = c;
  return out;
}

Poly poly_mul_1pr2(const Poly& p) {
  Poly out;
  for (const auto& [pw, c] : p) {
    out[pw] += c;
    out[pw + 2] += c;
  }
  return out;
}

Poly poly_deriv(const Poly& p) {
  Poly out;
  for (const auto& [pw, c] : p) {
    if (pw != 0) out[pw - 1] += static_cast<Real>(pw) * c;
  }
  return out;
}

Poly poly_scaled(const Poly& p, Coeff c) {
  Poly out;
  for (const auto& [pw, v] : p) out[pw] = c * v;
  return out;
}

// (1+r^2)^{E+1} d/dr [ P (1+r^2)^{-E} ] = P'(1+r^2) - 2 E r P.
Poly radial_derivative(const Poly& p, Real e) {
  Poly out = poly_mul_1pr2(poly_deriv(p));
  poly_add(out, poly_mul_r(p, 1), Coeff(-2.0L * e));
  return out;
}

// Sign of Gamma(x) for real non-integer x.
int gamma_sign(double x) {
  if (x > 0) return 1;
  const double k = std::ceil(-x);  // x in (-k, -k+1)
  return (static_cast<long long>(k) % 2 == 0) ? 1 : -1;
}

void check_s(double s) {
  if (!(s > 1.0 && s < 2.0)) throw ConfigError("line model: s must lie in (1, 2)");
}

}  // namespace

// ---- LineFunction ----------------------------------------------------------

void LineFunction::add_term(int j, int shift, int power, Coeff c) {
  Component comp;
  comp.shift = shift;
  comp.poly[power] = c;
  add_component(j, comp, Coeff(1.0L));
}

void LineFunction::add_component(int j, const Component& c, Coeff scale) {
  auto it = comps_.find(j);
  if (it == comps_.end()) {
    Component copy{c.shift, poly_scaled(c.poly, scale)};
    comps_.emplace(j, std::move(copy));
    drop_zeros();
    return;
  }
  Component& dst = it->second;
  Poly src = poly_scaled(c.poly, scale);
  int src_shift = c.shift;
  while (dst.shift < src_shift) {
    dst.poly = poly_mul_1pr2(dst.poly);
    ++dst.shift;
  }
  while (src_shift < dst.shift) {
    src = poly_mul_1pr2(src);
    ++src_shift;
  }
  poly_add(dst.poly, src, Coeff(1.0L));
  drop_zeros();
}

void LineFunction::drop_zeros() {
  for (auto it = comps_.begin(); it != comps_.end();) {
    Poly& p = it->second.poly;
    for (auto pit = p.begin(); pit != p.end();) {
      if (pit->second == Coeff(0.0L)) {
        pit = p.erase(pit);
      } else {
        ++pit;
      }
    }
    if (p.empty()) {
      it = comps_.erase(it);
    } else {
      ++it;
    }
  }
}

LineFunction& LineFunction::operator+=(const LineFunction& o) {
  for (const auto& [j, c] : o.comps_) add_component(j, c, Coeff(1.0L));
  return *this;
}

LineFunction& LineFunction::operator-=(const LineFunction& o) {
  for (const auto& [j, c] : o.comps_) add_component(j, c, Coeff(-1.0L));
  return *this;
}

LineFunction LineFunction::operator+(const LineFunction& o) const {
  LineFunction r = *this;
  r += o;
  return r;
}

LineFunction LineFunction::operator-(const LineFunction& o) const {
  LineFunction r = *this;
  r -= o;
  return r;
}

LineFunction LineFunction::scaled(Coeff c) const {
  LineFunction r(s_);
  for (const auto& [j, comp] : comps_) r.add_component(j, comp, c);
  return r;
}

LineFunction LineFunction::with_shift_at_least(int shift) const {
  LineFunction r = *this;
  for (auto& [j, comp] : r.comps_) {
    while (comp.shift < shift) {
      comp.poly = poly_mul_1pr2(comp.poly);
      ++comp.shift;
    }
  }
  return r;
}

std::complex<double> LineFunction::evaluate(double r, double alpha) const {
  std::complex<double> total = 0.0;
  for (const auto& [j, comp] : comps_) {
    std::complex<double> p = 0.0;
    for (const auto& [pw, c] : comp.poly) {
      p += std::complex<double>(static_cast<double>(c.real()), static_cast<double>(c.imag())) *
           std::pow(r, pw);
    }
    total += p * std::pow(1.0 + r * r, -(s_ + comp.shift)) * std::polar(1.0, j * alpha);
  }
  return total;
}

Real LineFunction::max_abs_coeff() const {
  Real m = 0.0L;
  for (const auto& [j, comp] : comps_) {
    for (const auto& [pw, c] : comp.poly) m = std::max(m, std::abs(c));
  }
  return m;
}

bool LineFunction::parity_consistent() const {
  for (const auto& [j, comp] : comps_) {
    if (comp.poly.empty()) continue;
    const int parity = std::abs(comp.poly.begin()->first) % 2;
    for (const auto& [pw, c] : comp.poly) {
      if (std::abs(pw) % 2 != parity) return false;
    }
  }
  return true;
}

LineFunction LineVector::as_function() const {
  LineFunction f(s);
  for (const auto& [pw, c] : radial) f.add_term(j, l, pw, Coeff(c));
  return f;
}

// ---- normalization constants -----------------------------------------------

double intertwine_const(double s, int l) {
  check_s(s);
  const double x = s - l - 1.0;
  const int sign = ((l % 2 == 0) ? 1 : -1) * gamma_sign(x);
  const double logv = std::log(std::numbers::pi) + 2.0 * std::lgamma(s - 1.0) -
                      std::lgamma(l + s) - std::lgamma(x);
  return sign * std::exp(logv);
}

namespace {

// log of the prefactor of v_{lj}, |j| <= l.
Real log_vlj_prefactor(double s, int l, int aj) {
  const double x = s - l - 1.0;
  const int sign = ((l % 2 == 0) ? 1 : -1) * gamma_sign(x);
  if (sign < 0) throw ConfigError("line model: negative normalization radicand");
  const Real half = 0.5L * (std::lgamma(static_cast<Real>(l) + s) + std::lgamma(static_cast<Real>(x)) +
                            std::log(2.0L * l + 1.0L) + std::lgamma(static_cast<Real>(l - aj + 1)) +
                            std::lgamma(static_cast<Real>(l + aj + 1)));
  return half - std::lgamma(static_cast<Real>(l + 1)) - std::log(std::numbers::pi_v<Real>) -
         std::lgamma(static_cast<Real>(s) - 1.0L);
}

Real binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  Real r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * static_cast<Real>(n - k + i) / static_cast<Real>(i);
  return r;
}

}  // namespace

double vll_normalization(double s, int l) {
  check_s(s);
  return static_cast<double>(std::exp(log_vlj_prefactor(s, l, l)));
}

LineVector make_vlj(double s, int l, int j) {
  check_s(s);
  if (l < 0 || std::abs(j) > l) throw ConfigError("make_vlj: need |j| <= l");
  const int aj = std::abs(j);
  const Real pref = std::exp(log_vlj_prefactor(s, l, aj));
  const Real sign = (j < 0 && aj % 2 == 1) ? -1.0L : 1.0L;
  LineVector v;
  v.s = s;
  v.l = l;
  v.j = j;
  for (int k = 0; k <= l - aj; ++k) {
    const Real c = pref * binomial(l, l - aj - k) * binomial(l, k) * ((k % 2 == 0) ? 1.0L : -1.0L);
    v.radial.emplace_back(2 * (l - k) - aj, static_cast<double>(sign * c));
  }
  std::sort(v.radial.begin(), v.radial.end());
  return v;
}

// ---- operators ---------------------------------------------------------------

LineFunction apply_operator(Operator op, const LineFunction& f) {
  const Real s = f.s();
  LineFunction out(f.s());
  for (const auto& [j, comp] : f.components()) {
    const Real e = s + comp.shift;
    const Poly& p = comp.poly;
    const Real jr = static_cast<Real>(j);
    Component res;
    int new_j = j;
    switch (op) {
      case Operator::ih:
        res.shift = comp.shift;
        res.poly = poly_scaled(p, Coeff(0.0L, 2.0L * jr));
        break;
      case Operator::h: {
        res.shift = comp.shift + 1;
        res.poly = poly_scaled(poly_mul_1pr2(p), Coeff(2.0L * s));
        poly_add(res.poly, poly_mul_r(radial_derivative(p, e), 1), Coeff(2.0L));
        break;
      }
      case Operator::R:
      case Operator::L: {
        // R = e^{i a}(2isr + i(r^2+1) d_r + (r - 1/r) d_a); L flips the first two signs.
        const Real sg = (op == Operator::R) ? 1.0L : -1.0L;
        new_j = (op == Operator::R) ? j + 1 : j - 1;
        res.shift = comp.shift;
        res.poly = poly_scaled(poly_mul_r(p, 1), Coeff(0.0L, sg * 2.0L * s));
        poly_add(res.poly, radial_derivative(p, e), Coeff(0.0L, sg));
        poly_add(res.poly, poly_mul_r(p, 1), Coeff(0.0L, jr));
        poly_add(res.poly, poly_mul_r(p, -1), Coeff(0.0L, -jr));
        break;
      }
      case Operator::Jplus:
      case Operator::Jminus: {
        // J+- = -e^{+-i a}(d_r +- (i/r) d_a)
        const Real sg = (op == Operator::Jplus) ? 1.0L : -1.0L;
        new_j = (op == Operator::Jplus) ? j + 1 : j - 1;
        res.shift = comp.shift + 1;
        res.poly = poly_scaled(radial_derivative(p, e), Coeff(-1.0L));
        poly_add(res.poly, poly_mul_r(poly_mul_1pr2(p), -1), Coeff(sg * jr));
        break;
      }
    }
    LineFunction piece(f.s());
    for (const auto& [pw, c] : res.poly) piece.add_term(new_j, res.shift, pw, c);
    out += piece;
  }
  return out;
}

namespace {

LineFunction op_f(const LineFunction& g) {
  return (apply_operator(Operator::Jplus, g) + apply_operator(Operator::Jminus, g)).scaled(0.5L);
}

LineFunction op_if(const LineFunction& g) {
  return (apply_operator(Operator::Jplus, g) - apply_operator(Operator::Jminus, g))
      .scaled(Coeff(1.0L) / Coeff(0.0L, 2.0L));
}

// ie + if
LineFunction op_ie_plus_if(const LineFunction& g) {
  return (apply_operator(Operator::R, g) + apply_operator(Operator::L, g)).scaled(0.5L);
}

// e - f
LineFunction op_e_minus_f(const LineFunction& g) {
  return (apply_operator(Operator::R, g) - apply_operator(Operator::L, g))
      .scaled(Coeff(1.0L) / Coeff(0.0L, 2.0L));
}

LineFunction op_e(const LineFunction& g) { return op_f(g) + op_e_minus_f(g); }
LineFunction op_ie(const LineFunction& g) { return op_ie_plus_if(g) - op_if(g); }

}  // namespace

LineFunction casimir(const LineFunction& f) {
  LineFunction hh = apply_operator(Operator::h, apply_operator(Operator::h, f));
  LineFunction ihih = apply_operator(Operator::ih, apply_operator(Operator::ih, f));
  LineFunction mixed = op_e(op_f(f)) + op_f(op_e(f)) - op_ie(op_if(f)) - op_if(op_ie(f));
  return hh - ihih + mixed.scaled(2.0L);
}

LineFunction k_casimir(const LineFunction& f) {
  LineFunction a = apply_operator(Operator::ih, apply_operator(Operator::ih, f));
  LineFunction b = op_ie_plus_if(op_ie_plus_if(f));
  LineFunction c = op_e_minus_f(op_e_minus_f(f));
  return (a + b + c).scaled(0.25L);
}

double residual(const LineFunction& a, const LineFunction& b) {
  const Real scale = std::max({Real(1.0L), a.max_abs_coeff(), b.max_abs_coeff()});
  return static_cast<double>((a - b).max_abs_coeff() / scale);
}

double LadderReport::max() const { return std::max({R, L, h, Jplus, Jminus}); }

namespace {

LineFunction vfun(double s, int l, int j) {
  if (l < 0 || std::abs(j) > l) return LineFunction(s);
  return make_vlj(s, l, j).as_function();
}

Real sqrt_ratio(Real num, Real den) {
  if (num <= 0.0L) return 0.0L;
  return std::sqrt(num / den);
}

}  // namespace

LadderReport check_ladder(double s, int l, int j) {
  check_s(s);
  if (l < 0 || std::abs(j) > l) throw ConfigError("check_ladder: need |j| <= l");
  const Real S = s, Lr = l, Jr = j;
  const LineFunction v = vfun(s, l, j);
  LadderReport rep;

  const Real cr = 2.0L * std::sqrt(std::max(Real(0), (Lr - Jr) * (Lr + Jr + 1.0L)));
  rep.R = residual(apply_operator(Operator::R, v), vfun(s, l, j + 1).scaled(Coeff(0.0L, cr)));
  const Real cl = 2.0L * std::sqrt(std::max(Real(0), (Lr + Jr) * (Lr - Jr + 1.0L)));
  rep.L = residual(apply_operator(Operator::L, v), vfun(s, l, j - 1).scaled(Coeff(0.0L, cl)));

  {
    const Real c_down = (l == 0) ? 0.0L
        : sqrt_ratio((Lr + 1.0L - S) * (Lr - 1.0L + S) * (Lr * Lr - Jr * Jr),
                     (2.0L * Lr - 1.0L) * (2.0L * Lr + 1.0L));
    const Real c_up = sqrt_ratio((Lr + 2.0L - S) * (Lr + S) * ((Lr + 1.0L) * (Lr + 1.0L) - Jr * Jr),
                                 (2.0L * Lr + 1.0L) * (2.0L * Lr + 3.0L));
    LineFunction rhs = vfun(s, l - 1, j).scaled(c_down) - vfun(s, l + 1, j).scaled(c_up);
    rep.h = residual(apply_operator(Operator::h, v).scaled(0.5L), rhs);
  }
  {
    const Real a = sqrt_ratio((Lr + 2.0L + Jr) * (Lr + 1.0L + Jr) * (S + Lr) * (Lr + 2.0L - S),
                              (2.0L * Lr + 1.0L) * (2.0L * Lr + 3.0L));
    const Real b = std::sqrt(std::max(Real(0), (Lr + Jr + 1.0L) * (Lr - Jr)));
    const Real c = (l == 0) ? 0.0L
        : sqrt_ratio((Lr - Jr) * (Lr - Jr - 1.0L) * (Lr - 1.0L + S) * (Lr + 1.0L - S),
                     (2.0L * Lr - 1.0L) * (2.0L * Lr + 1.0L));
    LineFunction rhs = vfun(s, l + 1, j + 1).scaled(a) - vfun(s, l, j + 1).scaled(b) +
                       vfun(s, l - 1, j + 1).scaled(c);
    rep.Jplus = residual(apply_operator(Operator::Jplus, v), rhs);
  }
  {
    const Real a = sqrt_ratio((Lr + 2.0L - Jr) * (Lr + 1.0L - Jr) * (S + Lr) * (Lr + 2.0L - S),
                              (2.0L * Lr + 1.0L) * (2.0L * Lr + 3.0L));
    const Real b = std::sqrt(std::max(Real(0), (Lr - Jr + 1.0L) * (Lr + Jr)));
    const Real c = (l == 0) ? 0.0L
        : sqrt_ratio((Lr + Jr) * (Lr + Jr - 1.0L) * (Lr - 1.0L + S) * (Lr + 1.0L - S),
                     (2.0L * Lr - 1.0L) * (2.0L * Lr + 1.0L));
    LineFunction rhs = vfun(s, l + 1, j - 1).scaled(a) - vfun(s, l, j - 1).scaled(b) +
                       vfun(s, l - 1, j - 1).scaled(c);
    rep.Jminus = residual(apply_operator(Operator::Jminus, v), rhs.scaled(-1.0L));
  }
  return rep;
}

double casimir_residual(double s, int l, int j) {
  const LineFunction v = vfun(s, l, j);
  return residual(casimir(v), v.scaled(-4.0L * s * (2.0L - s)));
}

double k_casimir_residual(double s, int l, int j) {
  const LineFunction v = vfun(s, l, j);
  return residual(k_casimir(v), v.scaled(-static_cast<Real>(l) * (l + 1)));
}

// ---- inner products and matrix coefficients ------------------------------------

namespace {

template <class F>
Real integrate(F f, Real lo, Real hi, Real tol) {
  Real err = 0.0L;
  Real l1 = 0.0L;
  const Real v = boost::math::quadrature::gauss_kronrod<Real, 31>::integrate(f, lo, hi, 25, tol,
                                                                               &err, &l1);
  if (!(err <= 100.0L * tol * std::max(l1, Real(1e-300L))) || !std::isfinite(static_cast<double>(v))) {
    throw QuadratureError("adaptive quadrature did not reach its tolerance");
  }
  return v;
}

}  // namespace

std::complex<double> inner_product(const LineFunction& f, const LineVector& v) {
  const auto it = f.components().find(v.j);
  if (it == f.components().end()) return 0.0;
  const Component& comp = it->second;
  const Real s = v.s;
  const Real cl = intertwine_const(v.s, v.l);
  auto radial = [&](Real r, bool imag) {
    Real pf_re = 0.0L, pf_im = 0.0L;
    for (const auto& [pw, c] : comp.poly) {
      const Real rp = std::pow(r, static_cast<Real>(pw));
      pf_re += c.real() * rp;
      pf_im += c.imag() * rp;
    }
    Real pv = 0.0L;
    for (const auto& [pw, c] : v.radial) pv += static_cast<Real>(c) * std::pow(r, static_cast<Real>(pw));
    const Real w = std::pow(1.0L + r * r, -(s + comp.shift)) * std::pow(1.0L + r * r, s - 2.0L - v.l);
    return (imag ? pf_im : pf_re) * pv * w * r;
  };
  const Real inf = std::numeric_limits<Real>::infinity();
  const Real re = integrate([&](Real r) { return radial(r, false); }, 0.0L, inf, 1e-15L);
  const Real im = integrate([&](Real r) { return radial(r, true); }, 0.0L, inf, 1e-15L);
  const Real scale = 2.0L * std::numbers::pi_v<Real> * cl;
  return {static_cast<double>(scale * re), static_cast<double>(scale * im)};
}

double matrix_coefficient(double s, int a, int ap, int c, double t) {
  check_s(s);
  if (a < 0 || ap < 0 || std::abs(c) > std::min(a, ap)) throw ConfigError("matrix_coefficient: need |c| <= min(a, a')");
  if (t < 0) throw ConfigError("matrix_coefficient: t must be >= 0");
  const LineVector v = make_vlj(s, a, c);
  const LineVector w = make_vlj(s, ap, c);
  const Real S = s, T = t;
  const Real cap = intertwine_const(s, ap);
  const Real pi = std::numbers::pi_v<Real>;

  // Product of radial coefficients grouped by m = (p + q) / 2, keeping track of p.
  struct Term {
    int m;
    int p;
    Real coeff;
  };
  std::vector<Term> terms;
  for (const auto& [p, ca] : v.radial) {
    for (const auto& [q, cb] : w.radial) {
      terms.push_back({(p + q) / 2, p, static_cast<Real>(ca) * static_cast<Real>(cb)});
    }
  }
  const int n = a + ap;

  if (t < 0.05) {
    // Direct form on u = r^2 with a log substitution u = e^x.
    auto integrand = [&](Real x) {
      const Real u = std::exp(x);
      Real sum = 0.0L;
      for (const Term& tm : terms) sum += tm.coeff * std::exp(T * tm.p) * std::pow(u, static_cast<Real>(tm.m));
      return sum * std::pow(1.0L + std::exp(2.0L * T) * u, -S - a) * std::pow(1.0L + u, S - 2.0L - ap) * u;
    };
    const Real val = integrate(integrand, -80.0L, 80.0L, 1e-14L);
    return static_cast<double>(std::exp(S * T) * cap * pi * val);
  }

  // Substitution w = (u+1)/(u e^{2t}+1); the integrand becomes w^{s-2-a'} times a polynomial.
  // With y = (w e^{2t} - 1)/(e^{2t} - 1) in [0, 1] each term reads
  //   e^{st} coeff e^{tp} (e^{2t}-1)^{-m-1} (1-w)^m y^{n-m}.
  const Real log_e2m1 = std::log(std::expm1(2.0L * T));
  std::vector<std::pair<int, Real>> g;  // (m, weight)
  for (const Term& tm : terms) {
    const Real wgt = tm.coeff * std::exp(S * T + T * tm.p - (tm.m + 1) * log_e2m1);
    g.emplace_back(tm.m, wgt);
  }
  const Real e2 = std::exp(2.0L * T);
  const Real e2m1 = std::expm1(2.0L * T);
  auto integrand = [&](Real x) {
    const Real wv = std::exp(x);
    const Real y = std::max(Real(0), (wv * e2 - 1.0L) / e2m1);
    Real sum = 0.0L;
    for (const auto& [m, wgt] : g) sum += wgt * std::pow(1.0L - wv, static_cast<Real>(m)) * std::pow(y, static_cast<Real>(n - m));
    return sum * std::pow(wv, S - 1.0L - ap);
  };
  const Real val = integrate(integrand, -2.0L * T, 0.0L, 1e-14L);
  return static_cast<double>(cap * pi * val);
}

}  // namespace orbitcount::line
