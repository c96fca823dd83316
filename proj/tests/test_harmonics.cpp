#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "orbitcount/errors.hpp"
#include "orbitcount/harmonics.hpp"

using namespace orbitcount;

TEST_SUITE("harmonics") {
  TEST_CASE("sph_harm matches the associated Legendre construction") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> th(0.0, M_PI), ph(-M_PI, M_PI);
    for (int i = 0; i < 40; ++i) {
      const double t = th(rng), p = ph(rng);
      for (int a = 0; a <= 10; ++a) {
        for (int b = -a; b <= a; ++b) {
          const auto got = harmonics::sph_harm(a, b, t, p);
          const auto want = oracle::ylm(a, b, t, p);
          CHECK(std::abs(got - want) <= 1e-11 * std::sqrt(2.0 * a + 1));
        }
      }
    }
  }

  TEST_CASE("Wigner d special values") {
    CHECK(harmonics::wigner_d(1, 1, 1, 0.7) == doctest::Approx((1 + std::cos(0.7)) / 2));
    CHECK(harmonics::wigner_d(1, 1, 0, 0.7) == doctest::Approx(-std::sin(0.7) / std::sqrt(2.0)));
    CHECK(harmonics::wigner_d(1, 0, 0, 0.7) == doctest::Approx(std::cos(0.7)));
    CHECK(harmonics::wigner_d(2, 0, 0, 0.7) == doctest::Approx((3 * std::cos(0.7) * std::cos(0.7) - 1) / 2));
    // d(beta) is orthogonal: sum_m d_{m'm} d_{m''m} = delta.
    for (int j = 0; j <= 6; ++j) {
      for (int m1 = -j; m1 <= j; ++m1) {
        for (int m2 = -j; m2 <= j; ++m2) {
          double s = 0;
          for (int m = -j; m <= j; ++m) s += harmonics::wigner_d(j, m1, m, 1.3) * harmonics::wigner_d(j, m2, m, 1.3);
          CHECK(s == doctest::Approx(m1 == m2 ? 1.0 : 0.0).epsilon(1e-12));
        }
      }
    }
    CHECK_THROWS_AS(harmonics::wigner_d(1, 2, 0, 0.1), ConfigError);
  }

  TEST_CASE("gen_sph_harm is a representation coefficient") {
    // D(R1 R2)_{bc} = sum_k D(R1)_{bk} D(R2)_{kc} with D = conj(Y) / sqrt(2a+1) up to convention;
    // test the homomorphism in the form that does not depend on the overall conjugation.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> a(-M_PI, M_PI), b(0.1, M_PI - 0.1);
    for (int trial = 0; trial < 10; ++trial) {
      const lie::EulerAngles e1{a(rng), b(rng), a(rng)}, e2{a(rng), b(rng), a(rng)};
      const lie::Mat3 R = lie::rotation_from_euler(e1) * lie::rotation_from_euler(e2);
      const lie::EulerAngles e12 = lie::euler_angles(R);
      for (int l = 0; l <= 4; ++l) {
        for (int bb = -l; bb <= l; ++bb) {
          for (int cc = -l; cc <= l; ++cc) {
            harmonics::Complex sum = 0;
            for (int k = -l; k <= l; ++k) {
              sum += harmonics::gen_sph_harm({l, bb, k}, e1) * harmonics::gen_sph_harm({l, k, cc}, e2);
            }
            sum /= std::sqrt(2.0 * l + 1);
            CHECK(std::abs(sum - harmonics::gen_sph_harm({l, bb, cc}, e12)) <= 1e-10);
          }
        }
      }
    }
  }

  TEST_CASE("orthonormality on K/M for a <= 8") {
    std::vector<std::function<oracle::Complex(double, double, double)>> fns;
    for (int a = 0; a <= 8; ++a)
      for (int b = -a; b <= a; ++b)
        fns.push_back([a, b](double phi, double theta, double) { return harmonics::sph_harm(a, b, theta, phi); });
    const Eigen::MatrixXcd G = oracle::gram(fns, 24, false);
    CHECK((G - Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("orthonormality on K for a <= 4") {
    std::vector<std::function<oracle::Complex(double, double, double)>> fns;
    for (int a = 0; a <= 4; ++a)
      for (int b = -a; b <= a; ++b)
        for (int c = -a; c <= a; ++c)
          fns.push_back([a, b, c](double phi, double theta, double psi) {
            return harmonics::gen_sph_harm({a, b, c}, phi, theta, psi);
          });
    const Eigen::MatrixXcd G = oracle::gram(fns, 10, true);
    CHECK((G - Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("bisector harmonic is M-invariant and reduces for c = 0") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      oracle::Mat2c g;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = oracle::Complex(n(rng), n(rng));
      g /= std::sqrt(g.determinant());
      const lie::LorentzMatrix L = lie::iota(lie::MoebiusElement(g(0, 0), g(0, 1), g(1, 0), g(1, 1)));
      lie::KAKData k = lie::kak(L);
      // Move M between the factors.
      const lie::Mat3 m = lie::rotation_about(lie::Vec3::UnitX(), 0.77);
      lie::KAKData k2 = k;
      k2.k1 = k.k1 * m;
      k2.k2 = m.transpose() * k.k2;
      for (const harmonics::BisectorIndex idx :
           {harmonics::BisectorIndex{1, 0, 1, 0, 1}, harmonics::BisectorIndex{2, 1, 3, -2, -1},
            harmonics::BisectorIndex{2, 2, 2, 0, 2}}) {
        CHECK(std::abs(harmonics::bisector_harmonic(idx, k) - harmonics::bisector_harmonic(idx, k2)) <= 1e-10);
      }
      const harmonics::BisectorIndex c0{2, 1, 1, -1, 0};
      const auto direct = harmonics::sph_harm(1, -1, k.dir1) * std::conj(harmonics::sph_harm(2, 1, lie::Vec3(-k.dir2)));
      CHECK(std::abs(harmonics::bisector_harmonic(c0, k) - direct) <= 1e-12);
      CHECK(std::abs(harmonics::bisector_harmonic(c0, k.dir1, harmonics::right_factor_angles(k)) - direct) <= 1e-10);
      // The right factor carries -dir2 to e1's image.
      const lie::Mat3 r = lie::rotation_from_euler(harmonics::right_factor_angles(k));
      CHECK((r * lie::Vec3::UnitX() + k.dir2).norm() <= 1e-10);
    }
  }

  TEST_CASE("index validation") {
    CHECK_THROWS_AS(harmonics::validate(harmonics::HarmonicIndex{1, 2, 0}), ConfigError);
    CHECK_THROWS_AS(harmonics::validate(harmonics::BisectorIndex{1, 0, 0, 0, 1}), ConfigError);
    CHECK_NOTHROW(harmonics::validate(harmonics::BisectorIndex{1, 0, 1, 1, 1}));
    CHECK_THROWS_AS(harmonics::bisector_harmonic({1, 0, 1, 0, 1}, lie::KAKData{}), DegenerateRotation);
  }
}
