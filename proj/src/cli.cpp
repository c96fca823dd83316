#include "orbitcount/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbitcount/errors.hpp"
#include "orbitcount/geometry.hpp"
#include "orbitcount/harmonics.hpp"
#include "orbitcount/lie.hpp"
#include "orbitcount/line_model.hpp"
#include "orbitcount/orbit.hpp"
#include "orbitcount/ps_measure.hpp"

namespace orbitcount::cli {

using Json = nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      f.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path + ": " + ec.message());
  }
}

namespace {

// Numbers in JSON artifacts are rounded to 9 significant digits so that
// reruns are byte-identical regardless of summation details in the last ulp.
Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

Json num(std::complex<double> z) { return Json::array({num(z.real()), num(z.imag())}); }

Json vec(const lie::Vec3& v) { return Json::array({num(v(0)), num(v(1)), num(v(2))}); }

template <class M>
Json matrix_json(const M& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(num(static_cast<double>(m(i, j))));
    rows.push_back(row);
  }
  return rows;
}

Json quad_json(const orbit::Quadruple& q) { return Json::array({q[0], q[1], q[2], q[3]}); }

Json header(const std::string& sub) {
  Json j;
  j["schema"] = 1;
  j["subcommand"] = sub;
  return j;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<long long> parse_ints(const std::string& s, std::size_t expected, const std::string& what) {
  std::vector<long long> v;
  for (const std::string& tok : split(s, ',')) {
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + tok + "'");
    }
    if (used != tok.size()) throw ConfigError(what + ": cannot parse '" + tok + "'");
    v.push_back(x);
  }
  if (v.size() != expected) {
    throw ConfigError(what + ": expected " + std::to_string(expected) + " comma-separated integers");
  }
  return v;
}

orbit::Quadruple parse_quadruple(const std::string& s, const std::string& what) {
  const auto v = parse_ints(s, 4, what);
  return {v[0], v[1], v[2], v[3]};
}

// "S4", "s4" or "4" -> generator index 3.
int parse_letter(const std::string& s) {
  std::string t = s;
  if (!t.empty() && (t[0] == 'S' || t[0] == 's')) t = t.substr(1);
  if (t.size() != 1 || t[0] < '1' || t[0] > '4') throw ConfigError("generator letter must be S1..S4");
  return t[0] - '1';
}

orbit::Int parse_tmax(double T) {
  if (!(T > 0) || T > orbit::kMaxT) throw ConfigError("tmax must lie in (0, 1e12]");
  return static_cast<orbit::Int>(std::floor(T));
}

int resolve_workers(int w) {
  if (w > 0) return w;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// Inline JSON when the argument starts with '[' or '{', otherwise a file name.
Json json_argument(const std::string& arg, const std::string& what) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '[' || arg[first] == '{')) return parse_json_text(arg, what);
  std::ifstream f(arg);
  if (!f) throw ConfigError(what + ": cannot read " + arg);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_json_text(ss.str(), what);
}

lie::Mat4 matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(what + ": expected a 4x4 row-major array");
  lie::Mat4 m;
  for (int r = 0; r < 4; ++r) {
    if (!j[r].is_array() || j[r].size() != 4) throw ConfigError(what + ": expected a 4x4 row-major array");
    for (int c = 0; c < 4; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(what + ": entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

lie::LorentzMatrix parse_conjugator(const std::string& s) {
  if (s == "default") return orbit::default_conjugator();
  if (s == "identity") return lie::LorentzMatrix();
  const lie::LorentzMatrix g(matrix_from_json(json_argument(s, "conjugator"), "conjugator"));
  if (g.form_residual() > 1e-9) throw ConfigError("conjugator does not preserve the Lorentz form");
  if (g(3, 3) < 1.0 - 1e-9) throw ConfigError("conjugator must preserve the future sheet");
  return g;
}

orbit::PruneMode parse_prune(const std::string& s) {
  if (s == "auto") return orbit::PruneMode::Auto;
  if (s == "conjugated") return orbit::PruneMode::Conjugated;
  if (s == "unconjugated") return orbit::PruneMode::Unconjugated;
  throw ConfigError("prune must be auto, conjugated or unconjugated");
}

// "tmin:tmax:n" -> geometric grid.
std::vector<double> parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw ConfigError("grid must be tmin:tmax:n");
  try {
    return orbit::geometric_grid(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("grid must be tmin:tmax:n");
  }
}

// tmax * 10^(-k / per_decade) for k = 0, 1, ... down to tmin, in increasing
// order.  Anchoring at tmax keeps whole decades below it on the grid.
std::vector<double> default_grid(double tmin, double tmax, int per_decade) {
  if (per_decade < 1) throw ConfigError("points per decade must be >= 1");
  tmin = std::max(1.0, tmin);
  std::vector<double> g{tmax};
  for (int k = 1;; ++k) {
    const double t = tmax * std::pow(10.0, -static_cast<double>(k) / per_decade);
    if (t < tmin * (1 - 1e-12)) break;
    g.push_back(t);
  }
  std::reverse(g.begin(), g.end());
  return g;
}

std::string curve_csv(const orbit::CountCurve& c) {
  std::string s = "T,N\n";
  for (const auto& [t, n] : c.points) s += format_number(t) + "," + std::to_string(n) + "\n";
  return s;
}

orbit::CountCurve read_curve_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("T,N", 0) != 0) throw ConfigError(path + ": expected header T,N");
  orbit::CountCurve c;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw ConfigError(path + ": malformed row '" + line + "'");
    try {
      c.points.emplace_back(std::stod(parts[0]), std::stoll(parts[1]));
    } catch (const std::exception&) {
      throw ConfigError(path + ": malformed row '" + line + "'");
    }
  }
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    if (!(c.points[i].first > c.points[i - 1].first)) throw ConfigError(path + ": T must be strictly increasing");
  }
  return c;
}

// Largest / smallest - 1 of N / T^delta over the top decade.
double stability(const orbit::CountCurve& c, double delta) {
  double tmax = 0.0;
  for (const auto& [t, n] : c.points) {
    if (n > 0) tmax = std::max(tmax, t);
  }
  double lo = INFINITY, hi = 0.0;
  for (const auto& [t, n] : c.points) {
    if (n > 0 && t >= tmax / 10.0 * (1 - 1e-12)) {
      const double r = static_cast<double>(n) / std::pow(t, delta);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  return hi / lo - 1.0;
}

struct Output {
  std::ostream& out;
  std::string path;
  void emit(const std::string& content) const {
    if (path.empty() || path == "-") {
      out << content;
    } else {
      write_atomic(path, content);
    }
  }
  void emit(const Json& j) const { emit(j.dump(2) + "\n"); }
};

// ---- configuration file ------------------------------------------------------------

// Tokens for one JSON config entry, keyed by the long option name.
void append_tokens(const std::string& key, const Json& v, std::vector<std::string>& out) {
  const std::string flag = "--" + key;
  if (v.is_boolean()) {
    if (v.get<bool>()) out.push_back(flag);
  } else if (v.is_null()) {
  } else if (v.is_string()) {
    out.push_back(flag);
    out.push_back(v.get<std::string>());
  } else if (v.is_number_integer()) {
    out.push_back(flag);
    out.push_back(std::to_string(v.get<long long>()));
  } else if (v.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    out.push_back(flag);
    out.push_back(buf);
  } else if (v.is_array()) {
    std::string joined;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) joined += ",";
      if (v[i].is_string()) {
        joined += v[i].get<std::string>();
      } else if (v[i].is_number_integer()) {
        joined += std::to_string(v[i].get<long long>());
      } else if (v[i].is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v[i].get<double>());
        joined += buf;
      } else {
        throw ConfigError("config key '" + key + "': arrays may hold numbers or strings only");
      }
    }
    out.push_back(flag);
    out.push_back(joined);
  } else {
    throw ConfigError("config key '" + key + "': nested objects are not supported");
  }
}

// Splices `--config FILE` into the argument list: the file's entries become
// options placed before the user's own, and the last occurrence of an option
// wins, so flags override the file and the file overrides defaults.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;

  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const Json cfg = parse_json_text(ss.str(), "config file " + path);
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");

  std::string sub;
  if (!rest.empty() && !rest.front().empty() && rest.front()[0] != '-') {
    sub = rest.front();
    rest.erase(rest.begin());
  } else if (cfg.contains("subcommand") && cfg["subcommand"].is_string()) {
    sub = cfg["subcommand"].get<std::string>();
  } else {
    throw ConfigError("no subcommand given on the command line or in the config file");
  }
  std::vector<std::string> out{sub};
  for (const auto& [key, value] : cfg.items()) {
    if (key == "subcommand" || key == "schema") continue;
    append_tokens(key, value, out);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// ---- option structs --------------------------------------------------------------

struct PackCountArgs {
  std::string root = "-1,2,2,3";
  double tmax = 1e5;
  bool periodic = false;
  bool include_bounding = false;
  std::string ideal_triangle;
  std::string grid;
  int per_decade = 10;
  std::string format = "csv";
  std::string out;
  int workers = 0;
};

struct IdealCountArgs {
  std::string root = "-1,2,2,3";
  double tmax = 1e4;
  std::string excluded = "S4";
  bool periodic = false;
  std::string out;
  int workers = 0;
};

struct FitArgs {
  std::string in;
  std::string root = "-1,2,2,3";
  double tmax = 1e5;
  bool periodic = false;
  bool include_bounding = false;
  int per_decade = 10;
  double decades = 2.0;
  double expect = NAN;
  double tol = 0.05;
  double max_variation = NAN;
  std::string out;
  int workers = 0;
};

struct VectorArgs {
  std::string vector = "-1,2,2,3";
  double tmax = 1e4;
  std::string norm = "linf";
  std::string parity = "all";
  int depth_margin = 0;
  std::size_t max_vectors = 50'000'000;
  std::string out;
  int workers = 0;
};

struct BallArgs {
  double tmax = 1e4;
  std::string conjugator = "default";
  double safety = 4.0;
  std::string prune = "auto";
  std::size_t max_visits = 200'000'000;
  std::string elements;
  std::string out;
  int workers = 0;
};

struct MeasureArgs {
  double tmax = 2e4;
  std::string conjugator = "default";
  double safety = 4.0;
  double delta = ps::kApollonianDelta;
  double s = NAN;
  bool at_delta = false;
  int amax = 2;
  std::string index;
  int doublings = 3;
  std::string out;
  int workers = 0;
};

struct CpArgs {
  std::string root = "-1,2,2,3";
  double ball_tmax = 2000.0;
  bool periodic = false;
  std::string ideal_triangle;
  double norm_scale = 1.0;
  bool no_period_restriction = false;
  double delta = ps::kApollonianDelta;
  double check_tmax = 0.0;
  std::string out;
  int workers = 0;
};

struct LineArgs {
  double s = ps::kApollonianDelta;
  int lmax = 6;
  double tol = 1e-9;
  double coefficient_tol = 1e-8;
  std::string out;
};

struct KakArgs {
  std::string matrix;
  int random = 0;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  std::string out;
};

struct SvgArgs {
  std::string root = "-1,2,2,3";
  double tmax = 100;
  bool periodic = false;
  bool include_bounding = false;
  int width = 800;
  double min_radius_px = 0.5;
  bool labels = false;
  bool check = false;
  double tangency_tol = 1e-3;
  std::string out;
};

// ---- subcommands ------------------------------------------------------------------

orbit::CircleOptions circle_options(bool periodic, bool include_bounding, const std::string& letter, int workers) {
  orbit::CircleOptions o;
  o.periodic = periodic;
  o.include_bounding = include_bounding;
  o.excluded_first = letter.empty() ? -1 : parse_letter(letter);
  o.workers = resolve_workers(workers);
  return o;
}

double smallest_positive(const orbit::CircleEnumeration& e) {
  for (orbit::Int k : e.curvatures) {
    if (k > 0) return static_cast<double>(k);
  }
  return 1.0;
}

int cmd_pack_count(const PackCountArgs& a, std::ostream& out) {
  const orbit::Quadruple root = parse_quadruple(a.root, "root");
  const orbit::Int T = parse_tmax(a.tmax);
  const auto opt = circle_options(a.periodic, a.include_bounding, a.ideal_triangle, a.workers);
  const orbit::CircleEnumeration e = orbit::enumerate_circles(root, T, opt);
  const std::vector<double> grid =
      a.grid.empty() ? default_grid(smallest_positive(e), static_cast<double>(T), a.per_decade) : parse_grid(a.grid);
  const orbit::CountCurve curve = orbit::count_curve(e, grid);
  const Output o{out, a.out};
  if (a.format == "csv") {
    o.emit(curve_csv(curve));
    return kOk;
  }
  if (a.format != "json") throw ConfigError("format must be csv or json");
  Json j = header("pack-count");
  j["root"] = quad_json(root);
  j["tmax"] = T;
  j["periodic"] = a.periodic;
  j["include_bounding"] = a.include_bounding;
  j["excluded_first"] = opt.excluded_first < 0 ? Json(nullptr) : Json("S" + std::to_string(opt.excluded_first + 1));
  j["total"] = e.curvatures.size();
  j["base_circles"] = e.base_circles;
  j["nodes"] = e.nodes;
  Json pts = Json::array();
  for (const auto& [t, n] : curve.points) pts.push_back(Json::array({num(t), n}));
  j["curve"] = pts;
  Json hist = Json::array();
  for (std::size_t i = 0; i < e.curvatures.size();) {
    std::size_t k = i;
    while (k < e.curvatures.size() && e.curvatures[k] == e.curvatures[i]) ++k;
    hist.push_back(Json::array({e.curvatures[i], k - i}));
    i = k;
  }
  j["histogram"] = hist;
  o.emit(j);
  return kOk;
}

int cmd_ideal_count(const IdealCountArgs& a, std::ostream& out) {
  const orbit::Quadruple root = parse_quadruple(a.root, "root");
  const orbit::Int T = parse_tmax(a.tmax);
  const int letter = parse_letter(a.excluded);
  const auto base = circle_options(a.periodic, false, "", a.workers);
  const orbit::CircleEnumeration full = orbit::enumerate_circles(root, T, base);
  Json per = Json::array();
  std::size_t chosen = 0;
  long long sum = 0;
  for (int k = 0; k < 4; ++k) {
    const std::size_t n = orbit::ideal_triangle_count(root, T, k, base).curvatures.size();
    per.push_back(n);
    sum += static_cast<long long>(n);
    if (k == letter) chosen = n;
  }
  Json j = header("ideal-count");
  j["root"] = quad_json(root);
  j["tmax"] = T;
  j["excluded_first"] = "S" + std::to_string(letter + 1);
  j["count"] = chosen;
  j["full_count"] = full.curvatures.size();
  j["per_letter"] = per;
  // A circle produced by a word avoids three of the four possible excluded
  // letters, while the root circles are counted under all four.
  j["identity_residual"] = sum - 3 * static_cast<long long>(full.curvatures.size()) -
                           static_cast<long long>(full.base_circles);
  Output{out, a.out}.emit(j);
  return kOk;
}

int cmd_fit_delta(const FitArgs& a, std::ostream& out) {
  orbit::CountCurve curve;
  Json source;
  if (!a.in.empty()) {
    curve = read_curve_csv(a.in);
    source = a.in;
  } else {
    const orbit::Quadruple root = parse_quadruple(a.root, "root");
    const orbit::Int T = parse_tmax(a.tmax);
    const auto e = orbit::enumerate_circles(root, T, circle_options(a.periodic, a.include_bounding, "", a.workers));
    curve = orbit::count_curve(e, default_grid(smallest_positive(e), static_cast<double>(T), a.per_decade));
    source = quad_json(root);
  }
  const orbit::FitResult fit = orbit::fit_exponent(curve, a.decades);
  const double variation = stability(curve, fit.delta);
  Json j = header("fit-delta");
  j["source"] = source;
  j["decades"] = num(a.decades);
  j["delta"] = num(fit.delta);
  j["stderr"] = num(fit.stderr_delta);
  j["log_c"] = num(fit.log_c);
  j["points_used"] = fit.used;
  j["top_decade_variation"] = num(variation);
  bool ok = true;
  if (!std::isnan(a.expect)) {
    const bool pass = std::abs(fit.delta - a.expect) <= a.tol;
    j["expect"] = num(a.expect);
    j["tol"] = num(a.tol);
    j["delta_pass"] = pass;
    ok = ok && pass;
  }
  if (!std::isnan(a.max_variation)) {
    const bool pass = variation <= a.max_variation;
    j["max_variation"] = num(a.max_variation);
    j["variation_pass"] = pass;
    ok = ok && pass;
  }
  Output{out, a.out}.emit(j);
  return ok ? kOk : kToleranceFailure;
}

int cmd_vector_count(const VectorArgs& a, std::ostream& out) {
  const orbit::Quadruple v = parse_quadruple(a.vector, "vector");
  orbit::VectorCountOptions opt;
  if (a.norm == "linf") {
    opt.norm = orbit::NormKind::Linf;
  } else if (a.norm == "l2") {
    opt.norm = orbit::NormKind::L2;
  } else {
    throw ConfigError("norm must be linf or l2");
  }
  if (a.parity == "all") {
    opt.parity = orbit::Parity::All;
  } else if (a.parity == "even") {
    opt.parity = orbit::Parity::Even;
  } else if (a.parity == "odd") {
    opt.parity = orbit::Parity::Odd;
  } else {
    throw ConfigError("parity must be all, even or odd");
  }
  opt.depth_margin = a.depth_margin;
  opt.max_vectors = a.max_vectors;
  opt.workers = resolve_workers(a.workers);
  const auto r = orbit::orbit_vector_count(orbit::apollonian_generators(), v, a.tmax, opt);
  Json j = header("vector-count");
  j["vector"] = quad_json(v);
  j["tmax"] = num(a.tmax);
  j["norm"] = a.norm;
  j["parity"] = a.parity;
  j["depth_margin"] = a.depth_margin;
  j["count"] = r.count;
  j["states"] = r.states;
  Output{out, a.out}.emit(j);
  return kOk;
}

orbit::GroupBall build_ball(double tmax, const std::string& conj, double safety, const std::string& prune,
                            std::size_t max_visits, int workers) {
  orbit::BallOptions bo;
  bo.safety = safety;
  bo.prune = parse_prune(prune);
  bo.max_visits = max_visits;
  bo.workers = resolve_workers(workers);
  if (!(tmax > 1.0) || tmax > orbit::kMaxT) throw ConfigError("tmax must lie in (1, 1e12]");
  return orbit::group_ball(orbit::apollonian_generators(), parse_conjugator(conj), tmax, bo);
}

Json ball_summary(const orbit::GroupBall& b) {
  Json j;
  j["tmax"] = num(b.T);
  j["conjugator"] = matrix_json(b.conjugator);
  j["count"] = b.elements.size();
  j["visited"] = b.visited;
  j["degenerate"] = b.degenerate;
  j["duplicate_fingerprints"] = b.duplicate_fingerprints;
  j["form_exact"] = b.form_exact;
  j["conjugated_pruning"] = b.conjugated_pruning;
  j["safety_effective"] = num(b.safety_effective);
  j["min_pruned_norm"] = num(b.min_pruned_norm);
  if (ps::in_chamber(b.conjugator)) {
    const auto sup = ps::support_check(b.elements, b.conjugator);
    j["support_max_violation"] = num(sup.max_violation);
  }
  return j;
}

int cmd_ball(const BallArgs& a, std::ostream& out) {
  const orbit::GroupBall b = build_ball(a.tmax, a.conjugator, a.safety, a.prune, a.max_visits, a.workers);
  if (!a.elements.empty()) {
    std::string csv = "norm,t,dir1_x,dir1_y,dir1_z,dir2_x,dir2_y,dir2_z,alpha,beta,gamma,word_length,first_letter\n";
    for (const auto& e : b.elements) {
      const double vals[] = {e.norm,    e.t,       e.dir1(0), e.dir1(1),        e.dir1(2),       e.dir2(0),
                             e.dir2(1), e.dir2(2), e.right.alpha, e.right.beta, e.right.gamma};
      for (double v : vals) csv += format_number(v) + ",";
      csv += std::to_string(e.word_length) + "," + std::to_string(e.first_letter + 1) + "\n";
    }
    write_atomic(a.elements, csv);
  }
  Json j = header("ball");
  j.update(ball_summary(b));
  Output{out, a.out}.emit(j);
  return (b.form_exact && b.duplicate_fingerprints == 0) ? kOk : kToleranceFailure;
}

double measure_s(const MeasureArgs& a) {
  if (a.at_delta) return a.delta;
  return std::isnan(a.s) ? a.delta + 0.02 : a.s;
}

int cmd_ps_moments(const MeasureArgs& a, std::ostream& out) {
  const orbit::GroupBall b = build_ball(a.tmax, a.conjugator, a.safety, "auto", 200'000'000, a.workers);
  const double s = measure_s(a);
  const auto m = ps::ps_approx(b.elements, s);
  const auto table = ps::moment_table(m, a.amax, resolve_workers(a.workers));
  Json j = header("ps-moments");
  j["s"] = num(s);
  j["ball"] = ball_summary(b);
  Json rows = Json::array();
  for (const auto& [key, v] : table.values) {
    rows.push_back({{"a", key.first}, {"b", key.second}, {"value", num(v)}});
  }
  j["moments"] = rows;
  j["reality_residual"] = num(table.reality_residual());
  Output{out, a.out}.emit(j);
  return kOk;
}

harmonics::BisectorIndex parse_index(const std::string& s) {
  const auto v = parse_ints(s, 5, "index");
  harmonics::BisectorIndex idx{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                               static_cast<int>(v[3]), static_cast<int>(v[4])};
  harmonics::validate(idx);
  return idx;
}

int cmd_bisector(const MeasureArgs& a, std::ostream& out) {
  if (a.index.empty()) throw ConfigError("bisector needs --index a,b,a',b',c");
  if (a.doublings < 0) throw ConfigError("doublings must be >= 0");
  const harmonics::BisectorIndex idx = parse_index(a.index);
  const orbit::GroupBall b = build_ball(a.tmax, a.conjugator, a.safety, "auto", 200'000'000, a.workers);
  const int workers = resolve_workers(a.workers);
  std::vector<double> Ts;
  for (int k = a.doublings; k >= 0; --k) Ts.push_back(a.tmax / std::pow(2.0, k));
  const auto series = ps::bisector_series(b.elements, idx, Ts, workers);

  Json j = header("bisector");
  j["index"] = Json::array({idx.a, idx.b, idx.ap, idx.bp, idx.c});
  j["ball"] = ball_summary(b);
  const double s = measure_s(a);
  std::optional<ps::MomentTable> moments;
  std::optional<ps::Calibration> cal;
  if (idx.c == 0) {
    moments = ps::moment_table(ps::ps_approx(b.elements, s), std::max(idx.a, idx.ap), workers);
    cal = ps::calibrate(series.counts.back().second, series.counts.back().first, a.delta);
    j["s"] = num(s);
    j["calibration"] = {{"delta", num(cal->delta)}, {"amplitude", num(cal->amplitude)}, {"T", num(cal->T)},
                        {"label", "calibrated on the trivial index"}};
  }
  Json rows = Json::array();
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    const auto [T, S] = series.samples[i];
    const double count = static_cast<double>(series.counts[i].second);
    Json r;
    r["T"] = num(T);
    r["count"] = series.counts[i].second;
    r["sum"] = num(S);
    r["ratio_to_count"] = count > 0 ? num(std::abs(S) / count) : Json(nullptr);
    if (moments) {
      const auto pred = ps::main_term_predict(*moments, idx, *cal, T);
      r["main_term_calibrated"] = num(pred);
      const auto nu = moments->at(idx.ap, idx.bp) * std::conj(moments->at(idx.a, idx.b));
      r["double_ratio"] = (count > 0 && std::abs(nu) > 0) ? num(S / count / nu) : Json(nullptr);
    }
    rows.push_back(r);
  }
  j["series"] = rows;
  Output{out, a.out}.emit(j);
  return kOk;
}

int cmd_cp(const CpArgs& a, std::ostream& out) {
  const orbit::Quadruple root = parse_quadruple(a.root, "root");
  ps::CpOptions opt;
  opt.delta = a.delta;
  opt.ball_T = a.ball_tmax;
  opt.norm_scale = a.norm_scale;
  opt.excluded_first = a.ideal_triangle.empty() ? -1 : parse_letter(a.ideal_triangle);
  opt.periodic = a.periodic;
  opt.period_restriction = !a.no_period_restriction;
  opt.workers = resolve_workers(a.workers);
  opt.ball.workers = opt.workers;
  const auto est = ps::c_P_estimate(orbit::apollonian_generators(), root, opt);
  Json j = header("c-p-estimate");
  j["root"] = quad_json(root);
  j["delta"] = num(a.delta);
  j["c_P"] = num(est.c_P);
  auto part = [](const ps::CpPart& p) {
    return Json{{"ball_count", p.ball_count},
                {"amplitude", num(p.amplitude)},
                {"cusp_integral", num(p.cusp_integral)},
                {"norm_integral", num(p.norm_integral)},
                {"value", num(p.value)}};
  };
  j["even"] = part(est.even);
  j["odd"] = part(est.odd);
  j["divergence_warning"] = est.divergence_warning;
  j["notes"] = est.notes;
  if (a.check_tmax > 0) {
    const orbit::Int T = parse_tmax(a.check_tmax);
    const auto e = orbit::enumerate_circles(root, T, circle_options(a.periodic, false, a.ideal_triangle, a.workers));
    const auto curve = orbit::count_curve(e, orbit::geometric_grid(static_cast<double>(T) / 10, static_cast<double>(T), 6));
    Json rows = Json::array();
    for (const auto& [t, n] : curve.points) {
      rows.push_back({{"T", num(t)}, {"N", n}, {"predicted_over_count", num(est.c_P * std::pow(t, a.delta) / n)}});
    }
    j["consistency"] = rows;
  }
  Output{out, a.out}.emit(j);
  return kOk;
}

int cmd_line_verify(const LineArgs& a, std::ostream& out) {
  if (a.lmax < 0) throw ConfigError("lmax must be >= 0");
  Json j = header("line-verify");
  j["s"] = num(a.s);
  j["lmax"] = a.lmax;
  j["tol"] = num(a.tol);
  double worst_ladder = 0, worst_casimir = 0, worst_k = 0, worst_norm = 0;
  Json per_l = Json::array();
  for (int l = 0; l <= a.lmax; ++l) {
    double ladder = 0, cas = 0, kc = 0;
    for (int m = -l; m <= l; ++m) {
      ladder = std::max(ladder, line::check_ladder(a.s, l, m).max());
      cas = std::max(cas, line::casimir_residual(a.s, l, m));
      kc = std::max(kc, line::k_casimir_residual(a.s, l, m));
    }
    const line::LineVector v = line::make_vlj(a.s, l, 0);
    const double nrm = std::abs(line::inner_product(v.as_function(), v) - 1.0);
    per_l.push_back({{"l", l}, {"ladder", num(ladder)}, {"casimir", num(cas)}, {"k_casimir", num(kc)},
                     {"norm", num(nrm)}});
    worst_ladder = std::max(worst_ladder, ladder);
    worst_casimir = std::max(worst_casimir, cas);
    worst_k = std::max(worst_k, kc);
    worst_norm = std::max(worst_norm, nrm);
  }
  j["per_l"] = per_l;
  Json coef = Json::array();
  double worst_coef = 0;
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    const double got = line::matrix_coefficient(a.s, 0, 0, 0, t);
    const double want = std::sinh((a.s - 1) * t) / ((a.s - 1) * std::sinh(t));
    const double rel = std::abs(got / want - 1.0);
    worst_coef = std::max(worst_coef, rel);
    coef.push_back({{"t", num(t)}, {"quadrature", num(got)}, {"closed_form", num(want)}, {"relative_error", num(rel)}});
  }
  j["matrix_coefficient"] = coef;
  const bool pass = worst_ladder <= a.tol && worst_casimir <= a.tol && worst_k <= a.tol && worst_norm <= a.tol &&
                    worst_coef <= a.coefficient_tol;
  j["max"] = {{"ladder", num(worst_ladder)},
              {"casimir", num(worst_casimir)},
              {"k_casimir", num(worst_k)},
              {"norm", num(worst_norm)},
              {"matrix_coefficient", num(worst_coef)}};
  j["pass"] = pass;
  Output{out, a.out}.emit(j);
  return pass ? kOk : kToleranceFailure;
}

double kak_roundtrip(const lie::LorentzMatrix& L, const lie::KAKData& k) {
  const lie::Mat4 back =
      lie::embed_rotation(k.k1).matrix() * lie::boost(k.t).matrix() * lie::embed_rotation(k.k2).matrix();
  return (back - L.matrix()).cwiseAbs().maxCoeff();
}

lie::MoebiusElement random_moebius(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  lie::Complex e[4];
  for (auto& z : e) z = lie::Complex(n(rng), n(rng));
  const lie::Complex r = std::sqrt(e[0] * e[3] - e[1] * e[2]);
  return lie::MoebiusElement(e[0] / r, e[1] / r, e[2] / r, e[3] / r);
}

int cmd_kak(const KakArgs& a, std::ostream& out) {
  Json j = header("kak");
  if (!a.matrix.empty()) {
    const lie::LorentzMatrix L(matrix_from_json(json_argument(a.matrix, "matrix"), "matrix"));
    if (L.form_residual() > 1e-9) throw ConfigError("matrix does not preserve the Lorentz form");
    const lie::KAKData k = lie::kak(L);
    const auto e1 = lie::euler_angles(k.k1);
    const auto right = harmonics::right_factor_angles(k);
    const double rt = kak_roundtrip(L, k);
    j["t"] = num(k.t);
    j["dir1"] = vec(k.dir1);
    j["dir2"] = vec(k.dir2);
    j["k1"] = matrix_json(k.k1);
    j["k2"] = matrix_json(k.k2);
    j["k1_euler"] = Json::array({num(e1.alpha), num(e1.beta), num(e1.gamma)});
    j["right_euler"] = Json::array({num(right.alpha), num(right.beta), num(right.gamma)});
    j["roundtrip_residual"] = num(rt);
    j["pass"] = rt <= a.tol;
    Output{out, a.out}.emit(j);
    return rt <= a.tol ? kOk : kToleranceFailure;
  }
  if (a.random <= 0) throw ConfigError("kak needs --matrix or --random N");
  std::mt19937_64 rng(a.seed);
  double worst_rt = 0, worst_swap = 0;
  int skipped = 0;
  for (int i = 0; i < a.random; ++i) {
    const lie::LorentzMatrix L = lie::iota(random_moebius(rng));
    if (L(3, 3) - 1.0 <= lie::kDegenerateThreshold) {
      ++skipped;
      continue;
    }
    const lie::KAKData k = lie::kak(L);
    const lie::KAKData ki = lie::kak(L.inverse());
    worst_rt = std::max(worst_rt, kak_roundtrip(L, k));
    worst_swap = std::max({worst_swap, std::abs(ki.t - k.t), (ki.dir1 + k.dir2).norm(), (ki.dir2 + k.dir1).norm()});
  }
  const bool pass = worst_rt <= a.tol && worst_swap <= a.tol;
  j["samples"] = a.random;
  j["seed"] = a.seed;
  j["skipped_degenerate"] = skipped;
  j["max_roundtrip_residual"] = num(worst_rt);
  j["max_inverse_swap_residual"] = num(worst_swap);
  j["pass"] = pass;
  Output{out, a.out}.emit(j);
  return pass ? kOk : kToleranceFailure;
}

int cmd_render(const SvgArgs& a, std::ostream& out, std::ostream& err) {
  const orbit::Quadruple root = parse_quadruple(a.root, "root");
  const orbit::Int T = parse_tmax(a.tmax);
  if (a.width < 1) throw ConfigError("width must be positive");
  const auto set = geometry::packing_circles(root, T, a.periodic, a.include_bounding);
  geometry::SvgOptions so;
  so.width_px = a.width;
  so.min_radius_px = a.min_radius_px;
  so.labels = a.labels;
  Output{out, a.out}.emit(geometry::render_svg(set, so));
  Json j = header("render-svg");
  j["circles"] = set.circles.size();
  j["max_tangency_residual"] = num(set.max_tangency_residual);
  j["max_descartes_residual"] = num(set.max_descartes_residual);
  const bool pass = set.max_tangency_residual <= a.tangency_tol;
  if (a.check) j["pass"] = pass;
  err << j.dump() << "\n";
  return (a.check && !pass) ? kToleranceFailure : kOk;
}

void add_workers(CLI::App* s, int& w) {
  s->add_option("--workers", w, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

void add_measure_options(CLI::App* s, MeasureArgs& m) {
  s->add_option("--tmax", m.tmax, "Ball radius in the Lorentz norm");
  s->add_option("--conjugator", m.conjugator, "default, identity, or a 4x4 Lorentz matrix (JSON or file)");
  s->add_option("--safety", m.safety, "Pruning safety factor");
  s->add_option("--delta", m.delta, "Critical exponent used for weights and predictions");
  s->add_option("--s", m.s, "Measure exponent (default delta + 0.02)");
  s->add_flag("--at-delta", m.at_delta, "Use s = delta with the ball cutoff as regularization");
  s->add_option("--out", m.out, "Output file (default stdout)");
  add_workers(s, m.workers);
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  CLI::App app{"Orbit counting for the Apollonian group and related bisector statistics"};
  app.name("orbitcount");
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  PackCountArgs pc;
  auto* s_pack = app.add_subcommand("pack-count", "Count circles of curvature at most T");
  s_pack->add_option("--root", pc.root, "Root quadruple a,b,c,d");
  s_pack->add_option("--tmax", pc.tmax, "Largest curvature");
  s_pack->add_flag("--periodic", pc.periodic, "Root (0,0,n,n): count one period");
  s_pack->add_flag("--include-bounding", pc.include_bounding, "Count the bounding circle");
  s_pack->add_option("--ideal-triangle", pc.ideal_triangle, "Exclude words starting with this letter (S1..S4)");
  s_pack->add_option("--grid", pc.grid, "Sample grid tmin:tmax:n");
  s_pack->add_option("--per-decade", pc.per_decade, "Default grid density");
  s_pack->add_option("--format", pc.format, "csv or json");
  s_pack->add_option("--out", pc.out, "Output file (default stdout)");
  add_workers(s_pack, pc.workers);

  IdealCountArgs ic;
  auto* s_ideal = app.add_subcommand("ideal-count", "Circles inside one ideal triangle");
  s_ideal->add_option("--root", ic.root, "Root quadruple a,b,c,d");
  s_ideal->add_option("--tmax", ic.tmax, "Largest curvature");
  s_ideal->add_option("--excluded", ic.excluded, "Excluded first letter S1..S4");
  s_ideal->add_flag("--periodic", ic.periodic, "Root (0,0,n,n): count one period");
  s_ideal->add_option("--out", ic.out, "Output file (default stdout)");
  add_workers(s_ideal, ic.workers);

  FitArgs fa;
  auto* s_fit = app.add_subcommand("fit-delta", "Fit the growth exponent of N(T)");
  s_fit->add_option("--in", fa.in, "CSV from pack-count (columns T,N)");
  s_fit->add_option("--root", fa.root, "Root quadruple when no CSV is given");
  s_fit->add_option("--tmax", fa.tmax, "Largest curvature when no CSV is given");
  s_fit->add_flag("--periodic", fa.periodic, "Root (0,0,n,n): count one period");
  s_fit->add_flag("--include-bounding", fa.include_bounding, "Count the bounding circle");
  s_fit->add_option("--per-decade", fa.per_decade, "Grid density when no CSV is given");
  s_fit->add_option("--decades", fa.decades, "Fit over the top this many decades of T");
  s_fit->add_option("--expect", fa.expect, "Expected exponent (verify mode)");
  s_fit->add_option("--tol", fa.tol, "Allowed |delta - expect|");
  s_fit->add_option("--max-variation", fa.max_variation, "Allowed spread of N/T^delta over the top decade");
  s_fit->add_option("--out", fa.out, "Output file (default stdout)");
  add_workers(s_fit, fa.workers);

  VectorArgs va;
  auto* s_vec = app.add_subcommand("vector-count", "Count distinct orbit vectors of norm below T");
  s_vec->add_option("--vector,--root", va.vector, "Starting vector a,b,c,d");
  s_vec->add_option("--tmax", va.tmax, "Norm bound (strict)");
  s_vec->add_option("--norm", va.norm, "linf or l2");
  s_vec->add_option("--parity", va.parity, "all, even or odd word length");
  s_vec->add_option("--depth-margin", va.depth_margin, "Extra levels explored past the bound");
  s_vec->add_option("--max-vectors", va.max_vectors, "State cap (exit 3 when exceeded)");
  s_vec->add_option("--out", va.out, "Output file (default stdout)");
  add_workers(s_vec, va.workers);

  BallArgs ba;
  auto* s_ball = app.add_subcommand("ball", "Group elements of bounded norm with their KAK data");
  s_ball->add_option("--tmax", ba.tmax, "Ball radius in the Lorentz norm");
  s_ball->add_option("--conjugator", ba.conjugator, "default, identity, or a 4x4 Lorentz matrix (JSON or file)");
  s_ball->add_option("--safety", ba.safety, "Pruning safety factor");
  s_ball->add_option("--prune", ba.prune, "auto, conjugated or unconjugated");
  s_ball->add_option("--max-visits", ba.max_visits, "Visit cap (exit 3 when exceeded)");
  s_ball->add_option("--elements", ba.elements, "Also write every element to this CSV");
  s_ball->add_option("--out", ba.out, "Output file (default stdout)");
  add_workers(s_ball, ba.workers);

  MeasureArgs pm;
  auto* s_ps = app.add_subcommand("ps-moments", "Harmonic moments of the empirical limit measure");
  add_measure_options(s_ps, pm);
  s_ps->add_option("--amax", pm.amax, "Largest harmonic degree");

  MeasureArgs bs;
  auto* s_bis = app.add_subcommand("bisector", "Bisector sums over a ball with main-term comparison");
  add_measure_options(s_bis, bs);
  s_bis->add_option("--index", bs.index, "a,b,a',b',c")->required();
  s_bis->add_option("--doublings", bs.doublings, "Report T = tmax / 2^k for k up to this");

  CpArgs ca;
  auto* s_cp = app.add_subcommand("c-p-estimate", "Leading constant of the circle count");
  s_cp->add_option("--root", ca.root, "Root quadruple a,b,c,d");
  s_cp->add_option("--ball-tmax", ca.ball_tmax, "Radius of the balls behind both integrals");
  s_cp->add_flag("--periodic", ca.periodic, "Root (0,0,n,n)");
  s_cp->add_option("--ideal-triangle", ca.ideal_triangle, "Excluded first letter S1..S4");
  s_cp->add_option("--norm-scale", ca.norm_scale, "Scale of the max-entry norm");
  s_cp->add_flag("--no-period-restriction", ca.no_period_restriction, "Integrate the cusp factor over all atoms");
  s_cp->add_option("--delta", ca.delta, "Critical exponent");
  s_cp->add_option("--check-tmax", ca.check_tmax, "Compare with exact counts over the decade below this T");
  s_cp->add_option("--out", ca.out, "Output file (default stdout)");
  add_workers(s_cp, ca.workers);

  LineArgs la;
  auto* s_line = app.add_subcommand("line-verify", "Check the line-model identities");
  s_line->add_option("--s", la.s, "Representation parameter in (1,2)");
  s_line->add_option("--lmax", la.lmax, "Largest K-type");
  s_line->add_option("--tol", la.tol, "Tolerance for ladder, Casimir and norm residuals");
  s_line->add_option("--coefficient-tol", la.coefficient_tol, "Tolerance for the matrix coefficient");
  s_line->add_option("--out", la.out, "Output file (default stdout)");

  KakArgs ka;
  auto* s_kak = app.add_subcommand("kak", "KAK decomposition of a Lorentz matrix");
  s_kak->add_option("--matrix", ka.matrix, "4x4 row-major matrix, inline JSON or file");
  s_kak->add_option("--random", ka.random, "Check this many random elements instead");
  s_kak->add_option("--seed", ka.seed, "Seed for --random");
  s_kak->add_option("--tol", ka.tol, "Roundtrip tolerance");
  s_kak->add_option("--out", ka.out, "Output file (default stdout)");

  SvgArgs sa;
  auto* s_svg = app.add_subcommand("render-svg", "Draw the packing");
  s_svg->add_option("--root", sa.root, "Root quadruple a,b,c,d");
  s_svg->add_option("--tmax", sa.tmax, "Largest curvature drawn");
  s_svg->add_flag("--periodic", sa.periodic, "Root (0,0,n,n): draw one period");
  s_svg->add_flag("--include-bounding", sa.include_bounding, "Draw the bounding circle");
  s_svg->add_option("--width", sa.width, "Image width in pixels");
  s_svg->add_option("--min-radius-px", sa.min_radius_px, "Skip circles smaller than this");
  s_svg->add_flag("--labels", sa.labels, "Print curvatures inside large circles");
  s_svg->add_flag("--check", sa.check, "Exit 2 if tangency residuals exceed --tangency-tol");
  s_svg->add_option("--tangency-tol", sa.tangency_tol, "Relative tangency tolerance");
  s_svg->add_option("--out", sa.out, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (s_pack->parsed()) return cmd_pack_count(pc, out);
    if (s_ideal->parsed()) return cmd_ideal_count(ic, out);
    if (s_fit->parsed()) return cmd_fit_delta(fa, out);
    if (s_vec->parsed()) return cmd_vector_count(va, out);
    if (s_ball->parsed()) return cmd_ball(ba, out);
    if (s_ps->parsed()) return cmd_ps_moments(pm, out);
    if (s_bis->parsed()) return cmd_bisector(bs, out);
    if (s_cp->parsed()) return cmd_cp(ca, out);
    if (s_line->parsed()) return cmd_line_verify(la, out);
    if (s_kak->parsed()) return cmd_kak(ka, out);
    if (s_svg->parsed()) return cmd_render(sa, out, err);
  } catch (const FrontierExplosion& e) {
    err << "error: " << e.what() << "\n";
    return kResourceCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace orbitcount::cli
