#include "orbitcount/orbit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "orbitcount/errors.hpp"
#include "orbitcount/harmonics.hpp"
#include "orbitcount/parallel.hpp"

namespace orbitcount::orbit {

namespace {

constexpr Int kIntMax = std::numeric_limits<Int>::max();
constexpr Int kIntMin = std::numeric_limits<Int>::min();

Int narrow(__int128 v) {
  if (v > kIntMax || v < kIntMin) throw IntegerOverflow("integer value exceeds 64 bits");
  return static_cast<Int>(v);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Int checked_new_entry(const Quadruple& q, int i) {
  __int128 s = 0;
  for (int k = 0; k < 4; ++k) {
    if (k != i) s += q[k];
  }
  return narrow(2 * s - q[i]);
}

}  // namespace

// ---- basic integer algebra -------------------------------------------------------

__int128 descartes_value2(const Quadruple& q) {
  __int128 sq = 0, s = 0;
  for (Int x : q) {
    sq += static_cast<__int128>(x) * x;
    s += x;
  }
  return 2 * sq - s * s;
}

bool on_descartes_cone(const Quadruple& q) { return descartes_value2(q) == 0; }

std::string to_string(const Quadruple& q) {
  std::ostringstream os;
  os << q[0] << ',' << q[1] << ',' << q[2] << ',' << q[3];
  return os.str();
}

Quadruple apply(const IntMat4& m, const Quadruple& v) {
  Quadruple out{};
  for (int i = 0; i < 4; ++i) {
    __int128 s = 0;
    for (int k = 0; k < 4; ++k) s += static_cast<__int128>(m(i, k)) * v[k];
    out[i] = narrow(s);
  }
  return out;
}

IntMat4 multiply(const IntMat4& a, const IntMat4& b) {
  IntMat4 out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      __int128 s = 0;
      for (int k = 0; k < 4; ++k) s += static_cast<__int128>(a(i, k)) * b(k, j);
      out(i, j) = narrow(s);
    }
  }
  return out;
}

lie::Mat4 GeneratorSet::lorentz(const IntMat4& m) const {
  return to_lorentz * m.cast<double>() * from_lorentz;
}

namespace {

bool preserves_form(const IntMat4& m, const Eigen::Matrix4i& f) {
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      __int128 s = 0;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          s += static_cast<__int128>(m(a, i)) * f(a, b) * m(b, j);
        }
      }
      if (s != f(i, j)) return false;
    }
  }
  return true;
}

}  // namespace

void GeneratorSet::validate() const {
  if (gens.empty()) throw ConfigError("generator set is empty");
  if (inverse.size() != gens.size()) throw ConfigError("generator set: inverse table size mismatch");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (!preserves_form(gens[i], form)) throw ConfigError("generator does not preserve the form");
    const int k = inverse[i];
    if (k < 0 || static_cast<std::size_t>(k) >= gens.size() ||
        multiply(gens[k], gens[i]) != IntMat4::Identity()) {
      throw ConfigError("generator set: inverse table is wrong");
    }
  }
}

GeneratorSet apollonian_generators() {
  GeneratorSet g;
  for (int i = 0; i < 4; ++i) {
    IntMat4 m = IntMat4::Identity();
    for (int k = 0; k < 4; ++k) m(i, k) = 2;
    m(i, i) = -1;
    g.gens.push_back(m);
    g.inverse.push_back(i);
  }
  g.form = lie::descartes_gram_doubled();
  g.to_lorentz = lie::q_conjugator();
  g.from_lorentz = lie::q_conjugator();
  g.involutive = true;
  // Generator i reflects in the Descartes basis vector e_i, with Q_D(e_i) = 1/2.
  for (int i = 0; i < 4; ++i) g.walls.push_back(std::sqrt(2.0) * lie::q_conjugator().col(i));
  return g;
}

bool basepoint_in_chamber(const GeneratorSet& gens, const lie::Mat4& g) {
  if (gens.walls.empty()) return false;
  const lie::Vec4 x = g * lie::Vec4(0, 0, 0, 1);
  const lie::Mat4 J = lie::minkowski();
  for (const lie::Vec4& n : gens.walls) {
    if (!(x.dot(J * n) < -1e-12)) return false;
  }
  return true;
}

int reducing_generator(const Quadruple& q) {
  for (int i = 0; i < 4; ++i) {
    if (checked_new_entry(q, i) < q[i]) return i;
  }
  return -1;
}

Quadruple reduce_root(Quadruple q) {
  if (!on_descartes_cone(q)) throw ConfigError("reduce_root: " + to_string(q) + " is not a Descartes quadruple");
  for (int i = reducing_generator(q); i >= 0; i = reducing_generator(q)) {
    q[i] = checked_new_entry(q, i);
  }
  return q;
}

// ---- circle enumeration ----------------------------------------------------------

namespace {

struct CircleNode {
  Quadruple q;
  int last;
  int depth;
  int budget;  // remaining oracle levels past T; only meaningful in oracle mode
};

struct CircleWalk {
  Int T;
  const CircleOptions* opt;
  std::vector<Int> out;
  std::size_t nodes = 0;

  // Expands one node: returns children through `push`.
  template <class Push>
  void expand(const CircleNode& n, Push push) {
    ++nodes;
    if (opt->oracle_margin >= 0 && n.depth >= opt->max_depth) return;
    for (int i = 0; i < 4; ++i) {
      if (i == n.last) continue;
      const Int nv = checked_new_entry(n.q, i);
      if (nv < n.q[i]) {
        throw NonRootInput("curvature decreased along a reduced word at " + to_string(n.q));
      }
      int budget = n.budget;
      if (nv > T) {
        if (opt->oracle_margin < 0) continue;
        budget = (n.budget < 0 ? opt->oracle_margin : n.budget) - 1;
        if (budget < 0) continue;
      } else {
        budget = -1;
        if (nv > 0) out.push_back(nv);
      }
      Quadruple c = n.q;
      c[i] = nv;
      push(CircleNode{c, i, n.depth + 1, budget});
    }
  }

  void dfs(const CircleNode& start) {
    std::vector<CircleNode> stack{start};
    while (!stack.empty()) {
      const CircleNode n = stack.back();
      stack.pop_back();
      expand(n, [&](const CircleNode& c) { stack.push_back(c); });
    }
  }
};

constexpr int kCircleSplitDepth = 5;

}  // namespace

CircleEnumeration enumerate_circles(const Quadruple& root, Int T, const CircleOptions& opt) {
  if (T <= 0 || static_cast<double>(T) > kMaxT) throw ConfigError("tmax must lie in (0, 1e12]");
  if (!on_descartes_cone(root)) throw ConfigError("root " + to_string(root) + " is not a Descartes quadruple");
  if (reducing_generator(root) >= 0) {
    throw NonRootInput("quadruple " + to_string(root) + " is not reduced; reduce it first");
  }
  if (opt.excluded_first < -1 || opt.excluded_first > 3) throw ConfigError("excluded generator must be 1..4");
  const int zeros = static_cast<int>(std::count(root.begin(), root.end(), Int{0}));
  if (zeros > 0 && !opt.periodic) {
    throw ConfigError("root " + to_string(root) + " describes a periodic packing; pass the periodic flag");
  }
  if (opt.periodic && zeros != 2) throw ConfigError("periodic counting needs a root with exactly two zero curvatures");

  CircleEnumeration res;
  res.root = root;
  res.tmax = T;
  res.periodic = opt.periodic;

  // Base circles and the admissible first letters.
  std::vector<int> first_letters;
  if (opt.periodic) {
    // One period: the two lines are replaced freely, the two equal circles are
    // translates of each other, so one of them is counted and the translation
    // letters are not used at the top level.
    bool counted = false;
    for (int i = 0; i < 4; ++i) {
      if (root[i] == 0) {
        first_letters.push_back(i);
      } else if (!counted && root[i] <= T) {
        res.curvatures.push_back(root[i]);
        counted = true;
      }
    }
  } else {
    for (int i = 0; i < 4; ++i) {
      first_letters.push_back(i);
      if ((root[i] > 0 && root[i] <= T) || (root[i] < 0 && opt.include_bounding)) {
        res.curvatures.push_back(root[i]);
      }
    }
  }
  res.base_circles = res.curvatures.size();
  std::erase(first_letters, opt.excluded_first);

  // Breadth-first seeding down to the split depth, then independent subtrees.
  CircleWalk seed{T, &opt, {}, 0};
  std::vector<CircleNode> level;
  for (int i : first_letters) {
    const Int nv = checked_new_entry(root, i);
    if (nv < root[i]) throw NonRootInput("root is not reduced");
    int budget = -1;
    if (nv > T) {
      if (opt.oracle_margin < 0) continue;
      budget = opt.oracle_margin - 1;
      if (budget < 0) continue;
    } else if (nv > 0) {
      seed.out.push_back(nv);
    }
    Quadruple c = root;
    c[i] = nv;
    level.push_back(CircleNode{c, i, 1, budget});
  }
  seed.nodes = 1;
  for (int d = 1; d < kCircleSplitDepth && !level.empty(); ++d) {
    std::vector<CircleNode> next;
    for (const CircleNode& n : level) seed.expand(n, [&](const CircleNode& c) { next.push_back(c); });
    level = std::move(next);
  }

  std::vector<CircleWalk> walks(level.size(), CircleWalk{T, &opt, {}, 0});
  parallel_items(level.size(), opt.workers, [&](std::size_t k) { walks[k].dfs(level[k]); });

  res.nodes = seed.nodes;
  res.curvatures.insert(res.curvatures.end(), seed.out.begin(), seed.out.end());
  for (const CircleWalk& w : walks) {
    res.nodes += w.nodes;
    res.curvatures.insert(res.curvatures.end(), w.out.begin(), w.out.end());
  }
  std::sort(res.curvatures.begin(), res.curvatures.end());
  return res;
}

CircleEnumeration ideal_triangle_count(const Quadruple& root, Int T, int excluded_first, CircleOptions opt) {
  if (excluded_first < 0 || excluded_first > 3) throw ConfigError("excluded generator must be 1..4");
  opt.excluded_first = excluded_first;
  return enumerate_circles(root, T, opt);
}

bool CountCurve::nondecreasing() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].second < points[i - 1].second) return false;
  }
  return true;
}

CountCurve count_curve(const CircleEnumeration& e, const std::vector<double>& grid) {
  CountCurve c;
  for (double t : grid) {
    const auto it = std::upper_bound(e.curvatures.begin(), e.curvatures.end(), static_cast<Int>(std::floor(t)));
    c.points.emplace_back(t, static_cast<long long>(it - e.curvatures.begin()));
  }
  return c;
}

std::vector<double> geometric_grid(double tmin, double tmax, int n) {
  if (!(tmin > 0 && tmax > tmin) || n < 2) throw ConfigError("grid needs 0 < tmin < tmax and n >= 2");
  std::vector<double> g(n);
  const double r = std::log(tmax / tmin) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = tmin * std::exp(r * i);
  g.back() = tmax;
  return g;
}

FitResult fit_exponent(const CountCurve& curve, double decades) {
  double tmax = 0.0;
  for (const auto& [t, n] : curve.points) {
    if (n > 0) tmax = std::max(tmax, t);
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, n] : curve.points) {
    if (n > 0 && t > 0 && t >= tmax / std::pow(10.0, decades) * (1 - 1e-12)) {
      pts.emplace_back(std::log(t), std::log(static_cast<double>(n)));
    }
  }
  if (pts.size() < 8) throw InsufficientRange("fit_exponent: need at least 8 points in the fit window");
  double xmin = pts.front().first, xmax = pts.front().first;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.first);
    xmax = std::max(xmax, p.first);
  }
  if (xmax - xmin < decades * std::log(10.0) * (1 - 1e-9)) {
    throw InsufficientRange("fit_exponent: sample points do not span the requested decades");
  }
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  FitResult f;
  f.delta = sxy / sxx;
  f.log_c = my - f.delta * mx;
  double rss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - f.log_c - f.delta * x;
    rss += r * r;
  }
  f.stderr_delta = pts.size() > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  f.used = pts.size();
  return f;
}

std::vector<Quadruple> tree_quadruples(const Quadruple& root, Int T) {
  auto maxabs = [](const Quadruple& q) {
    Int m = 0;
    for (Int x : q) m = std::max(m, x < 0 ? -x : x);
    return m;
  };
  std::vector<Quadruple> out;
  if (maxabs(root) >= T) return out;
  std::vector<std::pair<Quadruple, int>> stack{{root, -1}};
  while (!stack.empty()) {
    auto [q, last] = stack.back();
    stack.pop_back();
    out.push_back(q);
    for (int i = 0; i < 4; ++i) {
      if (i == last) continue;
      Quadruple c = q;
      c[i] = checked_new_entry(q, i);
      if (maxabs(c) < T && c != q) stack.emplace_back(c, i);
      // a generator fixing q adds no new quadruple; its subtree mirrors the parent's
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---- vector orbits -------------------------------------------------------------

double vector_norm(const Quadruple& v, const VectorCountOptions& opt) {
  switch (opt.norm) {
    case NormKind::Linf: {
      double m = 0;
      for (Int x : v) m = std::max(m, std::abs(static_cast<double>(x)));
      return m;
    }
    case NormKind::L2: {
      double s = 0;
      for (Int x : v) s += static_cast<double>(x) * static_cast<double>(x);
      return std::sqrt(s);
    }
    case NormKind::Custom:
      if (!opt.custom) throw ConfigError("custom norm requested without a norm function");
      return opt.custom(v);
  }
  return 0.0;
}

namespace {

struct State {
  Quadruple q;
  int parity;
  bool operator==(const State& o) const { return q == o.q && parity == o.parity; }
};

struct StateHash {
  std::size_t operator()(const State& s) const {
    std::uint64_t h = static_cast<std::uint64_t>(s.parity);
    for (Int x : s.q) h = mix(h ^ static_cast<std::uint64_t>(x));
    return static_cast<std::size_t>(h);
  }
};

struct QuadHash {
  std::size_t operator()(const Quadruple& q) const {
    std::uint64_t h = 0;
    for (Int x : q) h = mix(h ^ static_cast<std::uint64_t>(x));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

VectorCountResult orbit_vector_count(const GeneratorSet& gens, const Quadruple& v, double T,
                                     const VectorCountOptions& opt) {
  gens.validate();
  if (!(T > 0) || T > kMaxT) throw ConfigError("vector count: T must lie in (0, 1e12]");
  if (opt.depth_margin < 0) throw ConfigError("vector count: depth margin must be >= 0");

  struct Item {
    State s;
    int budget;  // levels still allowed past the bound
  };
  std::unordered_set<State, StateHash> seen;
  std::unordered_set<Quadruple, QuadHash> counted;
  auto wanted = [&](int parity) {
    return opt.parity == Parity::All || (opt.parity == Parity::Even) == (parity == 0);
  };
  auto consider = [&](const State& s, double n) {
    if (n < T && wanted(s.parity)) counted.insert(s.q);
  };

  std::vector<Item> frontier;
  const State start{v, 0};
  seen.insert(start);
  const double n0 = vector_norm(v, opt);
  consider(start, n0);
  frontier.push_back({start, n0 < T ? opt.depth_margin : opt.depth_margin - 1});

  while (!frontier.empty()) {
    // Children are computed in parallel chunks and merged in frontier order.
    const std::size_t chunk = 4096;
    const std::size_t nchunks = (frontier.size() + chunk - 1) / chunk;
    std::vector<std::vector<std::pair<State, double>>> kids(nchunks);
    parallel_items(nchunks, opt.workers, [&](std::size_t c) {
      const std::size_t lo = c * chunk, hi = std::min(frontier.size(), lo + chunk);
      for (std::size_t k = lo; k < hi; ++k) {
        const Item& it = frontier[k];
        if (it.budget < 0) continue;
        for (const IntMat4& g : gens.gens) {
          const State s{apply(g, it.s.q), 1 - it.s.parity};
          kids[c].emplace_back(s, vector_norm(s.q, opt));
        }
      }
    });
    std::vector<Item> next;
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t lo = c * chunk, hi = std::min(frontier.size(), lo + chunk);
      std::size_t kid = 0;
      for (std::size_t k = lo; k < hi; ++k) {
        const Item& it = frontier[k];
        if (it.budget < 0) continue;
        for (std::size_t g = 0; g < gens.size(); ++g, ++kid) {
          const auto& [s, n] = kids[c][kid];
          if (!seen.insert(s).second) continue;
          if (seen.size() > opt.max_vectors) throw FrontierExplosion("vector count exceeded its state cap");
          consider(s, n);
          const int budget = n < T ? opt.depth_margin : std::min(it.budget, opt.depth_margin) - 1;
          next.push_back({s, budget});
        }
      }
    }
    frontier = std::move(next);
  }

  VectorCountResult r;
  r.count = counted.size();
  r.states = seen.size();
  if (opt.keep_vectors) {
    r.vectors.assign(counted.begin(), counted.end());
    std::sort(r.vectors.begin(), r.vectors.end());
  }
  return r;
}

// ---- group balls -----------------------------------------------------------------

// The boost pushes the basepoint toward a point just off the centre of a free
// disc; the rotation keeps the limit measure away from the angle where the
// second Legendre polynomial vanishes, so every low moment is visibly nonzero.
lie::LorentzMatrix default_conjugator() {
  const lie::Mat3 r = Eigen::AngleAxisd(1.0, lie::Vec3(1, -1, 0).normalized()).toRotationMatrix();
  return lie::boost(1.5, lie::Vec3(-1.0, -1.1, -0.9)) * lie::embed_rotation(r);
}

std::vector<BallElement> GroupBall::within(double t) const {
  std::vector<BallElement> out;
  for (const auto& e : elements) {
    if (e.norm < t) out.push_back(e);
  }
  return out;
}

std::size_t GroupBall::count_within(double t) const {
  return static_cast<std::size_t>(
      std::count_if(elements.begin(), elements.end(), [t](const BallElement& e) { return e.norm < t; }));
}

namespace {

struct BallNode {
  IntMat4 m;
  int first;
  int length;
};

struct BallWalk {
  const GeneratorSet* gens;
  const BallOptions* opt;
  double T;
  double bound;                     // pruning bound
  bool conjugated;                  // which norm the bound applies to
  Eigen::RowVector4d row_plain;     // e4^T P
  Eigen::Vector4d col_plain;        // P^{-1} e4
  Eigen::RowVector4d row_conj;      // e4^T g^{-1} P
  Eigen::Vector4d col_conj;         // P^{-1} g e4
  lie::Mat4 ginv, g;
  std::atomic<std::size_t>* visits;

  std::vector<BallElement> out;
  std::vector<std::uint64_t> prints;
  std::size_t degenerate = 0;
  bool form_exact = true;
  double min_pruned = std::numeric_limits<double>::infinity();

  static double norm_from_l44(double c) {
    c = std::max(c, 1.0);
    return c + std::sqrt((c - 1.0) * (c + 1.0));
  }

  void emit(const BallNode& n, double conj_norm) {
    if (!preserves_form(n.m, gens->form)) form_exact = false;
    const lie::Mat4 L = ginv * gens->lorentz(n.m) * g;
    if (L(3, 3) - 1.0 <= lie::kDegenerateThreshold) {
      ++degenerate;
      return;
    }
    const lie::KAKData k = lie::kak(lie::LorentzMatrix(L));
    BallElement e;
    e.norm = conj_norm;
    e.t = k.t;
    e.dir1 = k.dir1;
    e.dir2 = k.dir2;
    e.right = harmonics::right_factor_angles(k);
    e.word_length = n.length;
    e.first_letter = n.first;
    out.push_back(e);
    std::uint64_t h = 0;
    for (int i = 0; i < 16; ++i) h = mix(h ^ static_cast<std::uint64_t>(n.m(i / 4, i % 4)));
    prints.push_back(h);
  }

  // Visits a node: emits it if it belongs to the ball, returns false if pruned.
  bool visit(const BallNode& n) {
    if (visits->fetch_add(1) + 1 > opt->max_visits) {
      throw FrontierExplosion("group ball exceeded its visit cap");
    }
    const lie::Vec4 mc = n.m.cast<double>() * col_plain;
    const double plain = norm_from_l44(row_plain.dot(mc));
    const lie::Vec4 mcc = n.m.cast<double>() * col_conj;
    const double conj = norm_from_l44(row_conj.dot(mcc));
    if ((conjugated ? conj : plain) > bound) {
      min_pruned = std::min(min_pruned, conj);
      return false;
    }
    if (n.length > 0 && conj < T && (!opt->even_only || n.length % 2 == 0)) emit(n, conj);
    return true;
  }

  template <class Push>
  void children(const BallNode& n, Push push) {
    for (std::size_t j = 0; j < gens->size(); ++j) {
      if (n.length > 0 && static_cast<int>(j) == gens->inverse[n.first]) continue;
      push(BallNode{multiply(gens->gens[j], n.m), static_cast<int>(j), n.length + 1});
    }
  }

  void dfs(const BallNode& start) {
    std::vector<BallNode> stack{start};
    while (!stack.empty()) {
      const BallNode n = stack.back();
      stack.pop_back();
      if (!visit(n)) continue;
      children(n, [&](const BallNode& c) { stack.push_back(c); });
    }
  }
};

}  // namespace

GroupBall group_ball(const GeneratorSet& gens, const lie::LorentzMatrix& gl, double T, const BallOptions& opt) {
  gens.validate();
  if (!(T > 1.0) || T > kMaxT) throw ConfigError("group ball: T must lie in (1, 1e12]");
  if (!(opt.safety >= 1.0)) throw ConfigError("group ball: safety must be >= 1");
  if (gl.form_residual() > 1e-9) throw ConfigError("group ball: conjugator is not a Lorentz matrix");

  GroupBall res;
  res.T = T;
  res.conjugator = gl.matrix();
  const double gnorm = lie::lorentz_norm(gl);
  switch (opt.prune) {
    case PruneMode::Auto:
      res.conjugated_pruning = basepoint_in_chamber(gens, gl.matrix());
      break;
    case PruneMode::Conjugated:
      if (!basepoint_in_chamber(gens, gl.matrix())) {
        throw ConfigError("group ball: conjugated pruning needs the basepoint inside the chamber");
      }
      res.conjugated_pruning = true;
      break;
    case PruneMode::Unconjugated:
      res.conjugated_pruning = false;
      break;
  }
  res.safety_effective = res.conjugated_pruning ? opt.safety : std::max(opt.safety, gnorm * gnorm);

  std::atomic<std::size_t> visits{0};
  BallWalk proto;
  proto.gens = &gens;
  proto.opt = &opt;
  proto.T = T;
  proto.bound = T * res.safety_effective;
  proto.conjugated = res.conjugated_pruning;
  proto.g = gl.matrix();
  proto.ginv = gl.inverse().matrix();
  const Eigen::RowVector4d e4 = Eigen::RowVector4d(0, 0, 0, 1);
  proto.row_plain = e4 * gens.to_lorentz;
  proto.col_plain = gens.from_lorentz * e4.transpose();
  proto.row_conj = e4 * proto.ginv * gens.to_lorentz;
  proto.col_conj = gens.from_lorentz * proto.g * e4.transpose();
  proto.visits = &visits;

  // Breadth-first seeding; subtrees below the split depth are independent.
  BallWalk seed = proto;
  std::vector<BallNode> level;
  const BallNode root{IntMat4::Identity(), -1, 0};
  if (seed.visit(root)) seed.children(root, [&](const BallNode& c) { level.push_back(c); });
  for (int d = 1; d < std::max(1, opt.split_depth) && !level.empty(); ++d) {
    std::vector<BallNode> next;
    for (const BallNode& n : level) {
      if (seed.visit(n)) seed.children(n, [&](const BallNode& c) { next.push_back(c); });
    }
    level = std::move(next);
  }

  std::vector<BallWalk> walks(level.size(), proto);
  parallel_items(level.size(), opt.workers, [&](std::size_t k) { walks[k].dfs(level[k]); });

  std::vector<const BallWalk*> parts{&seed};
  for (const BallWalk& w : walks) parts.push_back(&w);
  std::unordered_set<std::uint64_t> prints;
  res.min_pruned_norm = std::numeric_limits<double>::infinity();
  for (const BallWalk* w : parts) {
    res.elements.insert(res.elements.end(), w->out.begin(), w->out.end());
    for (std::uint64_t p : w->prints) {
      if (!prints.insert(p).second) ++res.duplicate_fingerprints;
    }
    res.degenerate += w->degenerate;
    res.form_exact = res.form_exact && w->form_exact;
    res.min_pruned_norm = std::min(res.min_pruned_norm, w->min_pruned);
  }
  res.visited = visits.load();
  return res;
}

}  // namespace orbitcount::orbit
