#include "orbitcount/ps_measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orbitcount/errors.hpp"
#include "orbitcount/parallel.hpp"

namespace orbitcount::ps {

namespace {

constexpr std::size_t kBlock = 4096;

template <class T>
T pairwise(const T* p, std::size_t n) {
  if (n <= 64) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(p, h) + pairwise(p + h, n - h);
}

// Sum of f(i) over i in [0, n): fixed blocks evaluated in parallel, block
// results combined pairwise, so the rounding never depends on the worker count.
template <class T, class F>
T blocked_sum(std::size_t n, int workers, F f) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<T> partial(nb);
  parallel_items(nb, workers, [&](std::size_t b) {
    const std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
    std::vector<T> v(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) v[i - lo] = f(i);
    partial[b] = pairwise(v.data(), v.size());
  });
  return pairwise(partial.data(), partial.size());
}

lie::Vec3 boundary_image(const lie::Mat4& L, const lie::Vec3& xi) {
  const lie::Vec4 y = L * lie::Vec4(xi(0), xi(1), xi(2), 1.0);
  return y.head<3>() / y(3);
}

}  // namespace

Complex pairwise_sum(const std::vector<Complex>& v) { return pairwise(v.data(), v.size()); }
double pairwise_sum(const std::vector<double>& v) { return pairwise(v.data(), v.size()); }

EmpiricalMeasure ps_approx(const std::vector<orbit::BallElement>& ball, double s, double T) {
  if (!(s > 0)) throw ConfigError("ps_approx: s must be positive");
  EmpiricalMeasure m;
  m.s = s;
  std::vector<double> w;
  for (const auto& e : ball) {
    if (e.norm < T) {
      m.atoms.push_back({e.dir1, std::exp(-s * e.t)});
      w.push_back(m.atoms.back().weight);
    }
  }
  if (m.atoms.empty()) throw EmptyBall("ps_approx: no ball element below the cutoff");
  const double total = pairwise_sum(w);
  for (auto& a : m.atoms) a.weight /= total;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = m.atoms[i].weight;
  m.total_weight = pairwise_sum(w);
  return m;
}

Complex moment(const EmpiricalMeasure& m, int a, int b, int workers) {
  harmonics::validate(harmonics::HarmonicIndex{a, b, 0});
  const Complex s = blocked_sum<Complex>(m.atoms.size(), workers, [&](std::size_t i) {
    return m.atoms[i].weight * harmonics::sph_harm(a, b, m.atoms[i].dir);
  });
  return s / m.total_weight;
}

Complex MomentTable::at(int a, int b) const {
  const auto it = values.find({a, b});
  if (it == values.end()) throw ConfigError("moment table has no entry for this index");
  return it->second;
}

double MomentTable::reality_residual() const {
  double r = 0.0;
  for (const auto& [key, v] : values) {
    const auto [a, b] = key;
    const double sign = (b % 2 == 0) ? 1.0 : -1.0;
    r = std::max(r, std::abs(at(a, -b) - sign * std::conj(v)));
  }
  return r;
}

MomentTable moment_table(const EmpiricalMeasure& m, int amax, int workers) {
  if (amax < 0) throw ConfigError("moment table: amax must be >= 0");
  MomentTable t;
  t.amax = amax;
  for (int a = 0; a <= amax; ++a) {
    for (int b = -a; b <= a; ++b) t.values[{a, b}] = moment(m, a, b, workers);
  }
  return t;
}

Complex bisector_sum(const std::vector<orbit::BallElement>& ball, const harmonics::BisectorIndex& idx,
                     double T, int workers) {
  harmonics::validate(idx);
  return blocked_sum<Complex>(ball.size(), workers, [&](std::size_t i) -> Complex {
    const auto& e = ball[i];
    if (!(e.norm < T)) return 0.0;
    if (idx.c == 0) {
      return harmonics::sph_harm(idx.ap, idx.bp, e.dir1) *
             std::conj(harmonics::sph_harm(idx.a, idx.b, lie::Vec3(-e.dir2)));
    }
    return harmonics::bisector_harmonic(idx, e.dir1, e.right);
  });
}

BisectorSeries bisector_series(const std::vector<orbit::BallElement>& ball,
                               const harmonics::BisectorIndex& idx, const std::vector<double>& Ts,
                               int workers) {
  BisectorSeries s;
  s.index = idx;
  for (double T : Ts) {
    s.samples.emplace_back(T, bisector_sum(ball, idx, T, workers));
    const auto n = static_cast<std::size_t>(
        std::count_if(ball.begin(), ball.end(), [T](const orbit::BallElement& e) { return e.norm < T; }));
    s.counts.emplace_back(T, n);
  }
  return s;
}

Calibration calibrate(std::size_t count, double T, double delta) {
  if (!(T > 1.0) || count == 0) throw EmptyBall("calibration needs a non-empty ball");
  return Calibration{delta, static_cast<double>(count) / std::pow(T, delta), T};
}

Complex main_term_predict(const MomentTable& moments, const harmonics::BisectorIndex& idx,
                          const Calibration& cal, double T) {
  harmonics::validate(idx);
  if (idx.c != 0) throw ConfigError("main-term prediction is only available for c = 0");
  return cal.amplitude * moments.at(idx.ap, idx.bp) * std::conj(moments.at(idx.a, idx.b)) *
         std::pow(T, cal.delta);
}

// ---- chamber geometry ----------------------------------------------------------

std::vector<lie::Vec4> apollonian_walls(const lie::Mat4& g) {
  const lie::Mat4 ginv = lie::LorentzMatrix(g).inverse().matrix();
  std::vector<lie::Vec4> walls;
  for (const lie::Vec4& n : orbit::apollonian_generators().walls) walls.push_back(ginv * n);
  return walls;
}

bool in_chamber(const lie::Mat4& g) { return orbit::basepoint_in_chamber(orbit::apollonian_generators(), g); }

SupportReport support_check(const std::vector<orbit::BallElement>& ball, const lie::Mat4& g) {
  if (!in_chamber(g)) throw ConfigError("support check: the basepoint is not inside the chamber");
  const auto walls = apollonian_walls(g);
  SupportReport r;
  for (const auto& e : ball) {
    if (e.first_letter < 0 || e.first_letter > 3) continue;
    const lie::Vec4& n = walls[e.first_letter];
    const double margin = e.dir1.dot(n.head<3>()) - n(3);
    r.max_violation = std::max(r.max_violation, -margin);
    ++r.checked;
  }
  return r;
}

EmpiricalMeasure conjugate_measure(const EmpiricalMeasure& m, const lie::Mat4& g, double s) {
  const lie::Mat4 ginv = lie::LorentzMatrix(g).inverse().matrix();
  const lie::Vec4 x = g * lie::Vec4(0, 0, 0, 1);
  EmpiricalMeasure out;
  out.s = s;
  std::vector<double> w;
  for (const Atom& a : m.atoms) {
    const double p = 1.0 / (x(3) - x.head<3>().dot(a.dir));
    out.atoms.push_back({boundary_image(ginv, a.dir).normalized(), a.weight * std::pow(p, s)});
    w.push_back(out.atoms.back().weight);
  }
  const double total = pairwise_sum(w);
  for (auto& a : out.atoms) a.weight /= total;
  out.total_weight = 1.0;
  return out;
}

// ---- c_P -------------------------------------------------------------------------

lie::Mat4 cusp_conjugator(const orbit::Quadruple& v) {
  if (!orbit::on_descartes_cone(v)) throw ConfigError("cusp conjugator: not a Descartes quadruple");
  const lie::Vec4 vd(static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2]),
                     static_cast<double>(v[3]));
  const lie::Vec4 vl = lie::q_conjugator() * vd;
  if (!(vl(3) > 0)) throw ConfigError("cusp conjugator: root is not future-directed");
  const lie::Vec3 dir = vl.head<3>() / vl(3);
  const lie::Mat3 R = Eigen::Quaterniond::FromTwoVectors(lie::Vec3::UnitX(), dir).toRotationMatrix();
  return lie::embed_rotation(R).matrix() * lie::boost(std::log(vl(3))).matrix();
}

namespace {

// Stereographic coordinate with the cusp direction e1 sent to infinity.
Complex stereo(const lie::Vec3& xi) { return Complex(xi(1), xi(2)) / (1.0 - xi(0)); }

CpPart cp_part(const orbit::GeneratorSet& gens, const lie::Mat4& h, const CpOptions& opt,
               const std::vector<std::pair<int, int>>& period_letters, CpEstimate& est, const char* label) {
  const orbit::GroupBall ball = orbit::group_ball(gens, lie::LorentzMatrix(h), opt.ball_T, opt.ball);
  CpPart part;
  part.ball_count = ball.elements.size();
  if (part.ball_count == 0) throw EmptyBall("c_P estimate: empty ball");
  part.amplitude = static_cast<double>(part.ball_count) / std::pow(opt.ball_T, opt.delta);

  const auto walls = apollonian_walls(h);
  // Translation of the cusp stabilizer, for the one-period restriction.
  Complex tau = 0.0;
  if (opt.periodic && opt.period_restriction && !period_letters.empty()) {
    const auto [a, b] = period_letters.front();
    const lie::Mat4 P = lie::LorentzMatrix(h).inverse().matrix() *
                        gens.lorentz(orbit::multiply(gens.gens[a], gens.gens[b])) * h;
    const lie::Vec3 base(-1, 0, 0);
    const lie::Vec4 y = P * lie::Vec4(base(0), base(1), base(2), 1.0);
    tau = stereo(lie::Vec3(y.head<3>() / y(3))) - stereo(base);
    if (std::abs(tau) < 1e-9) throw ConfigError("c_P estimate: cusp stabilizer has no translation part");
  }

  const lie::Mat4 qh = lie::q_conjugator() * h;
  std::vector<double> cusp(ball.elements.size()), norm(ball.elements.size());
  parallel_items(ball.elements.size(), opt.workers, [&](std::size_t i) {
    const auto& e = ball.elements[i];
    const lie::Vec3 xi2 = -e.dir2;
    bool keep = true;
    if (opt.excluded_first >= 0) {
      const lie::Vec4& n = walls[opt.excluded_first];
      keep = xi2.dot(n.head<3>()) - n(3) < 0;  // outside the excluded cap
    }
    if (keep && tau != 0.0) {
      const double along = (stereo(xi2) * std::conj(tau)).real() / std::abs(tau);
      keep = along >= -0.5 * std::abs(tau) && along < 0.5 * std::abs(tau);
    }
    cusp[i] = keep ? std::pow(2.0 / (1.0 - xi2(0)), opt.delta) : 0.0;
    const lie::Vec4 y = qh * lie::Vec4(e.dir1(0), e.dir1(1), e.dir1(2), 1.0);
    norm[i] = std::pow(opt.norm_scale * y.cwiseAbs().maxCoeff(), -opt.delta);
  });
  const double n = static_cast<double>(ball.elements.size());
  part.cusp_integral = pairwise_sum(cusp) / n;
  part.norm_integral = pairwise_sum(norm) / n;
  part.value = part.amplitude * part.cusp_integral * part.norm_integral;
  if (ball.duplicate_fingerprints != 0) {
    est.notes.push_back(std::string(label) + ": duplicate elements in the ball");
  }
  return part;
}

}  // namespace

CpEstimate c_P_estimate(const orbit::GeneratorSet& gens, const orbit::Quadruple& root, const CpOptions& opt) {
  if (!(opt.norm_scale > 0)) throw ConfigError("c_P estimate: norm scale must be positive");
  if (opt.excluded_first < -1 || opt.excluded_first > 3) throw ConfigError("c_P estimate: bad excluded generator");
  CpEstimate est;
  std::vector<std::pair<int, int>> period_letters;
  if (opt.periodic) {
    std::vector<int> circles;
    for (int i = 0; i < 4; ++i) {
      if (root[i] != 0) circles.push_back(i);
    }
    if (circles.size() != 2) throw ConfigError("c_P estimate: periodic root needs exactly two zero curvatures");
    period_letters.emplace_back(circles[0], circles[1]);
    if (!opt.period_restriction) {
      est.divergence_warning = true;
      est.notes.push_back("periodic packing without a period restriction: the cusp integral diverges");
    }
  }
  const lie::Mat4 h = cusp_conjugator(root);
  const lie::Mat4 h_odd = gens.lorentz(gens.gens[0]) * h;
  est.even = cp_part(gens, h, opt, period_letters, est, "even");
  est.odd = cp_part(gens, h_odd, opt, period_letters, est, "odd");
  est.c_P = est.even.value + est.odd.value;
  return est;
}

// ---- Poisson derivative ------------------------------------------------------------

PoissonCheck poisson_derivative_check(double delta, int n_theta, int n_phi, double eps) {
  if (n_theta < 2 || n_phi < 1 || !(eps > 0)) throw ConfigError("poisson check: bad grid");
  const Eigen::Quaterniond j(0.0, 0.0, 1.0, 0.0);
  auto ball_point = [&](Complex c) {
    const lie::MoebiusElement g(1.0, 0.0, c, 1.0);
    return lie::upper_half_space_to_ball(lie::moebius_act(g, j));
  };
  auto p_delta = [&](const lie::Vec3& x, double theta, double phi) {
    const double r = x.norm();
    double u = 0.0, v = 0.0;
    if (r > 0) {
      u = std::acos(std::clamp(x(2) / r, -1.0, 1.0));
      v = std::atan2(x(1), x(0));
    }
    // Boundary point (-sin th cos ph, -sin th sin ph, cos th) in the (1, i, j) basis.
    return std::pow(lie::poisson_kernel(phi + std::numbers::pi, theta, r, v, u), delta);
  };
  const lie::Vec3 fp = ball_point(eps), fm = ball_point(-eps);
  const lie::Vec3 gp = ball_point(Complex(0, eps)), gm = ball_point(Complex(0, -eps));
  PoissonCheck res;
  res.n_theta = n_theta;
  res.n_phi = n_phi;
  for (int a = 0; a < n_theta; ++a) {
    const double theta = std::numbers::pi * a / (n_theta - 1);
    for (int b = 0; b < n_phi; ++b) {
      const double phi = 2.0 * std::numbers::pi * b / n_phi;
      const double df = (p_delta(fp, theta, phi) - p_delta(fm, theta, phi)) / (2 * eps);
      const double dif = (p_delta(gp, theta, phi) - p_delta(gm, theta, phi)) / (2 * eps);
      const Complex reference = -delta * std::sin(theta) * std::polar(1.0, phi);
      res.max_residual = std::max(res.max_residual, std::abs(Complex(df, dif) - reference));
      res.max_reference = std::max(res.max_reference, std::abs(reference));
    }
  }
  return res;
}

}  // namespace orbitcount::ps
