#include <doctest.h>

#include <random>

#include "orbitcount/errors.hpp"
#include "orbitcount/line_model.hpp"

using namespace orbitcount;
using line::Operator;

namespace {

using C = std::complex<double>;

// Pointwise versions of the six operators, by central differences in (r, alpha).
C numeric_operator(Operator op, const line::LineFunction& f, double s, double r, double al) {
  const double h = 1e-5;
  const C val = f.evaluate(r, al);
  const C dr = (f.evaluate(r + h, al) - f.evaluate(r - h, al)) / (2 * h);
  const C da = (f.evaluate(r, al + h) - f.evaluate(r, al - h)) / (2 * h);
  const C I(0, 1);
  switch (op) {
    case Operator::h:
      return 2 * s * val + 2 * r * dr;
    case Operator::ih:
      return 2.0 * da;
    case Operator::R:
      return std::polar(1.0, al) * (2.0 * I * s * r * val + I * (r * r + 1) * dr + (r - 1 / r) * da);
    case Operator::L:
      return std::polar(1.0, -al) * (-2.0 * I * s * r * val - I * (r * r + 1) * dr + (r - 1 / r) * da);
    case Operator::Jplus:
      return -std::polar(1.0, al) * (dr + I / r * da);
    case Operator::Jminus:
      return -std::polar(1.0, -al) * (dr - I / r * da);
  }
  return 0.0;
}

}  // namespace

TEST_SUITE("line") {
  TEST_CASE("symbolic operators agree with finite differences") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ur(0.2, 3.0), ua(-M_PI, M_PI);
    for (double s : {1.2, 1.5, 1.9}) {
      for (int l = 0; l <= 3; ++l) {
        for (int j = -l; j <= l; ++j) {
          const line::LineFunction f = line::make_vlj(s, l, j).as_function();
          for (Operator op : {Operator::h, Operator::ih, Operator::R, Operator::L, Operator::Jplus, Operator::Jminus}) {
            const line::LineFunction g = line::apply_operator(op, f);
            for (int k = 0; k < 5; ++k) {
              const double r = ur(rng), al = ua(rng);
              const C want = numeric_operator(op, f, s, r, al);
              CHECK(std::abs(g.evaluate(r, al) - want) <= 1e-6 * std::max(1.0, std::abs(want)));
            }
          }
        }
      }
    }
  }

  TEST_CASE("ladder identities") {
    for (double s : {1.3, 1.30568, 1.7}) {
      for (int l = 0; l <= 8; ++l) {
        for (int j = -l; j <= l; ++j) CHECK(line::check_ladder(s, l, j).max() <= 1e-10);
      }
    }
  }

  TEST_CASE("Casimir eigenvalues") {
    for (double s : {1.1, 1.30568, 1.8}) {
      for (int l = 0; l <= 6; ++l) {
        for (int j = -l; j <= l; ++j) {
          CHECK(line::casimir_residual(s, l, j) <= 1e-9);
          CHECK(line::k_casimir_residual(s, l, j) <= 1e-9);
        }
      }
    }
  }

  TEST_CASE("v_lj are orthonormal for the intertwined inner product") {
    const double s = 1.4;
    for (int l = 0; l <= 4; ++l) {
      for (int lp = 0; lp <= 4; ++lp) {
        const line::LineVector v = line::make_vlj(s, l, 1 <= l ? 1 : 0);
        const line::LineVector w = line::make_vlj(s, lp, 1 <= lp ? 1 : 0);
        const C ip = line::inner_product(v.as_function(), w);
        const double want = (l == lp) ? 1.0 : 0.0;
        CHECK(std::abs(ip - want) <= 1e-10);
      }
    }
  }

  TEST_CASE("matrix coefficient against the closed form") {
    const double s = 1.5;
    for (double t : {0.01, 0.5, 1.0, 2.0, 5.0}) {
      const double want = std::sinh((s - 1) * t) / ((s - 1) * std::sinh(t));
      CHECK(line::matrix_coefficient(s, 0, 0, 0, t) == doctest::Approx(want).epsilon(1e-8));
    }
    // Matrix coefficients of a unitary representation stay bounded by 1.
    for (double t : {0.3, 1.5, 4.0}) {
      CHECK(std::abs(line::matrix_coefficient(1.3, 2, 2, 1, t)) <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("large-t decay rate of matrix coefficients") {
    const double s = 1.5;
    for (auto [a, ap, c] : {std::array<int, 3>{2, 1, 0}, std::array<int, 3>{1, 1, 1}, std::array<int, 3>{2, 2, 1}}) {
      auto scaled = [&](double t) {
        return line::matrix_coefficient(s, a, ap, c, t) / std::exp(t * (s - 2) - std::abs(c) * t);
      };
      const double r8 = scaled(8.0), r10 = scaled(10.0);
      CHECK(std::abs(r10 / r8 - 1.0) <= 0.01);
    }
  }

  TEST_CASE("argument validation and intertwiner") {
    CHECK_THROWS_AS(line::make_vlj(2.5, 1, 0), ConfigError);
    CHECK_THROWS_AS(line::make_vlj(1.5, 1, 2), ConfigError);
    // Gamma(s - l - 1) at negative arguments: the sign alternates with l.
    const double c0 = line::intertwine_const(1.5, 0), c1 = line::intertwine_const(1.5, 1);
    CHECK(c0 > 0);
    CHECK(std::isfinite(c1));
    CHECK(line::intertwine_const(1.5, 3) != 0.0);
  }

  TEST_CASE("line functions carry consistent parity") {
    const line::LineFunction f = line::make_vlj(1.6, 3, -2).as_function();
    CHECK(f.parity_consistent());
    CHECK(line::apply_operator(Operator::Jplus, f).parity_consistent());
    CHECK(line::residual(f, f.with_shift_at_least(3)) <= 1e-15);
  }
}
