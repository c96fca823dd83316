#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "orbitcount/errors.hpp"
#include "orbitcount/lie.hpp"

using namespace orbitcount;

namespace {

lie::MoebiusElement to_moebius(const oracle::Mat2c& g) { return lie::MoebiusElement(g(0, 0), g(0, 1), g(1, 0), g(1, 1)); }

double max_abs(const lie::Mat4& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("lie") {
  TEST_CASE("iota agrees with the Hermitian-matrix model") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      const auto g = oracle::random_sl2c(rng);
      const lie::Mat4 got = lie::iota(to_moebius(g)).matrix();
      const lie::Mat4 want = oracle::hermitian_iota(g);
      CHECK(max_abs(got - want) <= 1e-12 * std::max(1.0, max_abs(want)));
    }
  }

  TEST_CASE("iota of the diagonal torus is the x-w boost") {
    for (double t : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
      const lie::MoebiusElement a(std::exp(t / 2), 0.0, 0.0, std::exp(-t / 2));
      const lie::Mat4 L = lie::iota(a).matrix();
      CHECK(max_abs(L - oracle::boost_x(t)) <= 1e-12 * std::cosh(t));
      CHECK(max_abs(L - lie::boost(t).matrix()) <= 1e-12 * std::cosh(t));
      // Only the x-w block may be nontrivial.
      CHECK(L(1, 1) == doctest::Approx(1.0));
      CHECK(L(2, 2) == doctest::Approx(1.0));
      CHECK(L(0, 1) == 0.0);
      CHECK(L(1, 3) == 0.0);
    }
  }

  TEST_CASE("iota is a homomorphism into SO(3,1) and ignores the sign of g") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const auto g = oracle::random_sl2c(rng), h = oracle::random_sl2c(rng);
      const lie::LorentzMatrix Lg = lie::iota(to_moebius(g)), Lh = lie::iota(to_moebius(h));
      const lie::LorentzMatrix Lgh = lie::iota(to_moebius(g * h));
      const double scale = std::max(1.0, max_abs(Lgh.matrix()));
      CHECK(max_abs(Lgh.matrix() - (Lg * Lh).matrix()) <= 1e-12 * scale * max_abs(Lg.matrix()) * max_abs(Lh.matrix()));
      CHECK(Lg.form_residual() <= 1e-12 * max_abs(Lg.matrix()) * max_abs(Lg.matrix()));
      CHECK(max_abs(lie::iota(to_moebius(-g)).matrix() - Lg.matrix()) == 0.0);
      CHECK(Lg.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(Lg(3, 3) >= 1.0);
    }
  }

  TEST_CASE("Lorentz norm equals the squared largest singular value") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
      const auto g = oracle::random_sl2c(rng, 1.5);
      const double sigma = Eigen::JacobiSVD<oracle::Mat2c>(g).singularValues()(0);
      const double n = lie::lorentz_norm(lie::iota(to_moebius(g)));
      CHECK(n == doctest::Approx(sigma * sigma).epsilon(1e-10));
      CHECK(to_moebius(g).largest_singular_value() == doctest::Approx(sigma).epsilon(1e-10));
    }
    CHECK(lie::lorentz_norm(lie::boost(2.0)) == doctest::Approx(std::exp(2.0)));
    CHECK(lie::hyperbolic_distance(lie::boost(1.25)) == doctest::Approx(1.25));
  }

  TEST_CASE("Moebius group operations") {
    const lie::MoebiusElement g(2.0, 1.0, 1.0, 1.0);
    CHECK((g * g.inverse()).equivalent(lie::MoebiusElement()));
    CHECK(lie::MoebiusElement(-2.0, -1.0, -1.0, -1.0).equivalent(g));
    CHECK_THROWS_AS(lie::MoebiusElement(1.0, 1.0, 1.0, 1.0), ConfigError);
  }

  TEST_CASE("spherical angles use e1 as pole") {
    const auto s = lie::spherical_angles(lie::Vec3::UnitX());
    CHECK(s.theta == doctest::Approx(0.0));
    const auto e3 = lie::spherical_angles(lie::Vec3::UnitZ());
    CHECK(e3.theta == doctest::Approx(M_PI / 2));
    CHECK(e3.phi == doctest::Approx(M_PI / 2));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.05, M_PI - 0.05), p(-M_PI + 0.01, M_PI - 0.01);
    for (int i = 0; i < 50; ++i) {
      const double th = u(rng), ph = p(rng);
      const auto back = lie::spherical_angles(lie::unit_vector(th, ph));
      CHECK(back.theta == doctest::Approx(th));
      CHECK(back.phi == doctest::Approx(ph));
    }
  }

  TEST_CASE("Euler angles round-trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(-M_PI, M_PI), b(0.01, M_PI - 0.01);
    for (int i = 0; i < 100; ++i) {
      const lie::EulerAngles e{a(rng), b(rng), a(rng)};
      const lie::Mat3 R = lie::rotation_from_euler(e);
      CHECK((R * R.transpose() - lie::Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
      const lie::Mat3 R2 = lie::rotation_from_euler(lie::euler_angles(R));
      CHECK((R - R2).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // The middle angle tilts away from the pole e1.
    const lie::Mat3 R = lie::rotation_from_euler({0.4, 0.9, -1.1});
    CHECK(lie::spherical_angles(R * lie::Vec3::UnitX()).theta == doctest::Approx(0.9));
    // Weyl element flips the pole.
    CHECK((lie::weyl_element() * lie::Vec3::UnitX() + lie::Vec3::UnitX()).norm() <= 1e-15);
  }

  TEST_CASE("KAK reconstructs the element and swaps under inversion") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
      const lie::LorentzMatrix L = lie::iota(to_moebius(oracle::random_sl2c(rng)));
      const lie::KAKData k = lie::kak(L);
      const lie::Mat4 back =
          lie::embed_rotation(k.k1).matrix() * lie::boost(k.t).matrix() * lie::embed_rotation(k.k2).matrix();
      CHECK(max_abs(back - L.matrix()) <= 1e-10 * std::max(1.0, max_abs(L.matrix())));
      CHECK((k.k1 * lie::Vec3::UnitX() - k.dir1).norm() <= 1e-12);
      CHECK((k.k2.transpose() * lie::Vec3::UnitX() - k.dir2).norm() <= 1e-10);
      CHECK(lie::euler_angles(k.k1).gamma == doctest::Approx(0.0).epsilon(1e-12));
      // Boundary limit of L applied to the basepoint direction.
      const lie::Vec4 x = L.matrix() * lie::Vec4(0, 0, 0, 1);
      CHECK((x.head<3>().normalized() - k.dir1).norm() <= 1e-12);
      const lie::KAKData ki = lie::kak(L.inverse());
      CHECK(ki.t == doctest::Approx(k.t).epsilon(1e-12));
      CHECK((ki.dir1 + k.dir2).norm() <= 1e-12);
      CHECK((ki.dir2 + k.dir1).norm() <= 1e-12);
    }
  }

  TEST_CASE("KAK of a pure boost and of a rotation") {
    const lie::KAKData k = lie::kak(lie::boost(2.0));
    CHECK(k.t == doctest::Approx(2.0));
    CHECK((k.dir1 - lie::Vec3::UnitX()).norm() <= 1e-14);
    CHECK((k.dir2 - lie::Vec3::UnitX()).norm() <= 1e-14);
    CHECK_THROWS_AS(lie::kak(lie::embed_rotation(lie::rotation_about(lie::Vec3(1, 2, 3), 0.5))), DegenerateRotation);
  }

  TEST_CASE("q conjugates the Descartes form to the Minkowski form") {
    const lie::Mat4 q = lie::q_conjugator();
    CHECK(max_abs(q * q - lie::Mat4::Identity()) <= 1e-15);
    CHECK(max_abs(q * lie::descartes_gram() * q - lie::minkowski()) <= 1e-15);
    CHECK(max_abs(lie::descartes_gram_doubled().cast<double>() - 2 * lie::descartes_gram()) == 0.0);
    for (int i = 0; i < 4; ++i) {
      const lie::Mat4 S = oracle::generator(i).cast<double>();
      const lie::LorentzMatrix L(lie::to_lorentz(S));
      CHECK(L.form_residual() <= 1e-14);
    }
  }

  TEST_CASE("Poisson kernel") {
    CHECK(lie::poisson_kernel(0.3, 1.1, 0.0, 0.2, 0.4) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lie::poisson_kernel(0.0, 0.0, 1.0, 0.0, 0.0), ConfigError);
    // In three dimensions P^2 is the harmonic measure density: it averages to one.
    const auto gl = oracle::gauss_legendre<24>();
    double avg = 0.0;
    const int nphi = 64;
    for (const auto& [x, w] : gl) {
      for (int k = 0; k < nphi; ++k) avg += w / 2 / nphi * std::pow(lie::poisson_kernel(2 * M_PI * k / nphi, std::acos(x), 0.4, 0.7, 1.2), 2);
    }
    CHECK(avg == doctest::Approx(1.0).epsilon(1e-9));
    // hyperboloid -> ball
    const lie::Vec3 b = lie::hyperboloid_to_ball(lie::boost(1.0).matrix() * lie::Vec4(0, 0, 0, 1));
    CHECK(b(0) == doctest::Approx(std::tanh(0.5)));
  }
}
