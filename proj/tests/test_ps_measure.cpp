#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "orbitcount/errors.hpp"
#include "orbitcount/ps_measure.hpp"

using namespace orbitcount;

namespace {

// One shared ball for the suite; T = 3000 has a few thousand elements.
const orbit::GroupBall& ball() {
  static const orbit::GroupBall b =
      orbit::group_ball(orbit::apollonian_generators(), orbit::default_conjugator(), 3000.0);
  return b;
}

}  // namespace

TEST_SUITE("ps") {
  TEST_CASE("empirical measure is a probability measure") {
    const auto m = ps::ps_approx(ball().elements, ps::kApollonianDelta + 0.02);
    double total = 0;
    for (const auto& a : m.atoms) {
      CHECK(a.weight > 0);
      CHECK(a.dir.norm() == doctest::Approx(1.0).epsilon(1e-12));
      total += a.weight;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ps::moment(m, 0, 0) - 1.0) <= 1e-12);
    CHECK_THROWS_AS(ps::ps_approx(ball().elements, 1.3, 1.0), EmptyBall);
    CHECK_THROWS_AS(ps::ps_approx(ball().elements, -1.0), ConfigError);
  }

  TEST_CASE("moments are bounded and satisfy the reality relation") {
    const auto m = ps::ps_approx(ball().elements, 1.4);
    const auto tab = ps::moment_table(m, 6, 4);
    for (const auto& [ab, v] : tab.values) CHECK(std::abs(v) <= std::sqrt(2.0 * ab.first + 1) + 1e-12);
    CHECK(tab.reality_residual() <= 1e-12);
    CHECK(std::abs(tab.at(0, 0) - 1.0) <= 1e-12);
    CHECK_THROWS_AS(tab.at(7, 0), ConfigError);
    // Same value as a direct sum with the oracle harmonic.
    oracle::Complex direct = 0;
    for (const auto& a : m.atoms) {
      const auto s = lie::spherical_angles(a.dir);
      direct += a.weight * oracle::ylm(3, -2, s.theta, s.phi);
    }
    CHECK(std::abs(tab.at(3, -2) - direct) <= 1e-12);
  }

  TEST_CASE("sums do not depend on the worker count") {
    const auto m = ps::ps_approx(ball().elements, 1.35);
    CHECK(ps::moment(m, 4, 1, 1) == ps::moment(m, 4, 1, 7));
    const harmonics::BisectorIndex idx{2, 1, 3, -1, 1};
    CHECK(ps::bisector_sum(ball().elements, idx, 3000, 1) == ps::bisector_sum(ball().elements, idx, 3000, 5));
    std::vector<double> xs(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 1.0 / (i + 1.0);
    double naive = 0;
    for (double x : xs) naive += x;
    CHECK(ps::pairwise_sum(xs) == doctest::Approx(naive).epsilon(1e-14));
  }

  TEST_CASE("trivial bisector sum is the ball count") {
    const harmonics::BisectorIndex triv{0, 0, 0, 0, 0};
    const auto series = ps::bisector_series(ball().elements, triv, {300.0, 1000.0, 3000.0});
    REQUIRE(series.samples.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(series.samples[i].second.real() == doctest::Approx(static_cast<double>(series.counts[i].second)));
      CHECK(std::abs(series.samples[i].second.imag()) <= 1e-9);
      CHECK(series.counts[i].second == ball().count_within(series.counts[i].first));
    }
  }

  TEST_CASE("main-term prediction is only defined for c = 0") {
    const auto m = ps::ps_approx(ball().elements, 1.33);
    const auto tab = ps::moment_table(m, 3);
    const auto cal = ps::calibrate(ball().elements.size(), 3000.0, ps::kApollonianDelta);
    CHECK(cal.amplitude > 0);
    const auto pred = ps::main_term_predict(tab, {0, 0, 0, 0, 0}, cal, 3000.0);
    CHECK(pred.real() == doctest::Approx(static_cast<double>(ball().elements.size())));
    CHECK_THROWS_AS(ps::main_term_predict(tab, {1, 0, 1, 0, 1}, cal, 3000.0), ConfigError);
    CHECK_THROWS_AS(ps::calibrate(0, 3000.0, 1.3), EmptyBall);
  }

  TEST_CASE("atoms sit in the cap of their first letter") {
    const lie::Mat4 g = orbit::default_conjugator().matrix();
    REQUIRE(ps::in_chamber(g));
    const auto rep = ps::support_check(ball().elements, g);
    CHECK(rep.checked == ball().elements.size());
    CHECK(rep.max_violation <= 1e-9);
    const auto walls = ps::apollonian_walls(g);
    REQUIRE(walls.size() == 4);
    for (const auto& n : walls) CHECK(n.head<3>().squaredNorm() - n(3) * n(3) == doctest::Approx(1.0));
  }

  TEST_CASE("conjugated measure stays normalized") {
    const auto m = ps::ps_approx(ball().elements, 1.4);
    const auto c = ps::conjugate_measure(m, orbit::default_conjugator().matrix(), 1.4);
    double total = 0;
    for (const auto& a : c.atoms) total += a.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("c_P scales like lambda^-delta and restricts to triangles") {
    const auto gens = orbit::apollonian_generators();
    ps::CpOptions opt;
    opt.ball_T = 500.0;
    const auto base = ps::c_P_estimate(gens, {-1, 2, 2, 3}, opt);
    CHECK(base.c_P > 0);
    CHECK(base.c_P == doctest::Approx(base.even.value + base.odd.value));
    opt.norm_scale = 2.0;
    const auto scaled = ps::c_P_estimate(gens, {-1, 2, 2, 3}, opt);
    CHECK(scaled.c_P == doctest::Approx(base.c_P * std::pow(2.0, -opt.delta)).epsilon(1e-9));
    opt.norm_scale = 1.0;
    for (int k = 0; k < 4; ++k) {
      opt.excluded_first = k;
      const auto tri = ps::c_P_estimate(gens, {-1, 2, 2, 3}, opt);
      CHECK(tri.c_P <= base.c_P * (1 + 1e-12));
      CHECK(tri.c_P > 0);
    }
    opt.excluded_first = 7;
    CHECK_THROWS_AS(ps::c_P_estimate(gens, {-1, 2, 2, 3}, opt), ConfigError);
  }

  TEST_CASE("c_P for the periodic packing warns without a period restriction") {
    const auto gens = orbit::apollonian_generators();
    ps::CpOptions opt;
    opt.ball_T = 300.0;
    opt.periodic = true;
    const auto r = ps::c_P_estimate(gens, {0, 0, 1, 1}, opt);
    CHECK_FALSE(r.divergence_warning);
    CHECK(r.c_P > 0);
    opt.period_restriction = false;
    CHECK(ps::c_P_estimate(gens, {0, 0, 1, 1}, opt).divergence_warning);
  }

  TEST_CASE("cusp conjugator maps the standard cusp to the root") {
    const lie::Mat4 h = ps::cusp_conjugator({-1, 2, 2, 3});
    const lie::Vec4 want = lie::q_conjugator() * lie::Vec4(-1, 2, 2, 3);
    CHECK((h * lie::Vec4(1, 0, 0, 1) - want).norm() <= 1e-12);
    CHECK(lie::LorentzMatrix(h).form_residual() <= 1e-12);
    CHECK_THROWS_AS(ps::cusp_conjugator({1, 2, 3, 4}), ConfigError);
  }

  TEST_CASE("Poisson kernel derivative") {
    const auto r = ps::poisson_derivative_check(ps::kApollonianDelta);
    CHECK(r.max_residual <= 1e-6);
    CHECK(r.max_reference > 0.5);
    CHECK_THROWS_AS(ps::poisson_derivative_check(1.3, 1, 4), ConfigError);
  }
}
