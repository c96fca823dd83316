#pragma once

// Exact integer orbit enumeration for the Apollonian group and for general
// finitely generated integral groups preserving a quadratic form.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orbitcount/lie.hpp"

namespace orbitcount::orbit {

using Int = std::int64_t;
using Quadruple = std::array<Int, 4>;
using IntMat4 = Eigen::Matrix<Int, 4, 4>;

// Largest admissible curvature / norm bound.
inline constexpr double kMaxT = 1e12;

// 2 Q_D(x) = 2 sum x_i^2 - (sum x_i)^2, evaluated in 128-bit arithmetic.
__int128 descartes_value2(const Quadruple& q);
bool on_descartes_cone(const Quadruple& q);
std::string to_string(const Quadruple& q);

// Checked products; throw IntegerOverflow past 64 bits.
Quadruple apply(const IntMat4& m, const Quadruple& v);
IntMat4 multiply(const IntMat4& a, const IntMat4& b);

struct GeneratorSet {
  std::vector<IntMat4> gens;
  std::vector<int> inverse;      // gens[inverse[i]] * gens[i] = I
  Eigen::Matrix4i form;          // integral Gram matrix preserved by every generator
  lie::Mat4 to_lorentz;          // P with P * M * P^{-1} preserving diag(1,1,1,-1)
  lie::Mat4 from_lorentz;        // P^{-1}
  bool involutive = false;
  // Reflection groups only: unit spacelike wall normals in Lorentz coordinates,
  // oriented so that points of the open chamber pair negatively with each.
  std::vector<lie::Vec4> walls;

  std::size_t size() const { return gens.size(); }
  lie::Mat4 lorentz(const IntMat4& m) const;
  // Exact check that every generator preserves the form and that inverses match.
  void validate() const;
};

GeneratorSet apollonian_generators();
// True if g * e4 lies strictly inside the chamber (false when no walls are known).
bool basepoint_in_chamber(const GeneratorSet& gens, const lie::Mat4& g);
// A generator that strictly lowers the sum of the entries, or -1.
int reducing_generator(const Quadruple& q);
Quadruple reduce_root(Quadruple q);

// ---- circles ------------------------------------------------------------------

struct CircleOptions {
  bool include_bounding = false;  // count the negative-curvature bounding circle
  bool periodic = false;          // root has two zero curvatures: count one period
  int excluded_first = -1;        // ideal-triangle restriction on the first letter
  int workers = 1;
  // Oracle mode: keep exploring this many levels past a node whose new curvature
  // exceeds T (negative: plain pruning).
  int oracle_margin = -1;
  // Oracle mode only: hard depth limit.
  int max_depth = 64;
};

struct CircleEnumeration {
  Quadruple root{};
  Int tmax = 0;
  std::vector<Int> curvatures;   // sorted, one entry per counted circle
  std::size_t base_circles = 0;  // circles of the root quadruple that were counted
  std::size_t nodes = 0;         // words visited
  bool periodic = false;
};

// Throws NonRootInput if a generator lowers the root, ConfigError for a
// periodic root without the periodic flag or a T outside (0, kMaxT].
CircleEnumeration enumerate_circles(const Quadruple& root, Int T, const CircleOptions& opt = {});
CircleEnumeration ideal_triangle_count(const Quadruple& root, Int T, int excluded_first,
                                       CircleOptions opt = {});

struct CountCurve {
  std::vector<std::pair<double, long long>> points;  // (T, N)
  bool nondecreasing() const;
};

// Sample N(T) = #{curvatures <= T} on the given grid.
CountCurve count_curve(const CircleEnumeration& e, const std::vector<double>& grid);
// n points geometrically spaced on [tmin, tmax].
std::vector<double> geometric_grid(double tmin, double tmax, int n);

struct FitResult {
  double delta = 0.0;
  double stderr_delta = 0.0;
  double log_c = 0.0;
  std::size_t used = 0;
};

// Least squares slope of log N against log T over the top `decades` of T.
// Throws InsufficientRange unless >= 8 usable points span >= `decades`.
FitResult fit_exponent(const CountCurve& curve, double decades = 2.0);

// Every distinct quadruple gamma * root with max |entry| < T, collected from
// the reduced-word tree (cross-check for orbit_vector_count).
std::vector<Quadruple> tree_quadruples(const Quadruple& root, Int T);

// ---- vector orbits -----------------------------------------------------------

enum class NormKind { Linf, L2, Custom };
enum class Parity { All, Even, Odd };

struct VectorCountOptions {
  NormKind norm = NormKind::Linf;
  std::function<double(const Quadruple&)> custom;
  Parity parity = Parity::All;
  int depth_margin = 0;            // keep expanding this many levels past the norm bound
  std::size_t max_vectors = 50'000'000;
  int workers = 1;
  bool keep_vectors = false;
};

struct VectorCountResult {
  std::size_t count = 0;
  std::size_t states = 0;
  std::vector<Quadruple> vectors;  // sorted, when requested
};

double vector_norm(const Quadruple& v, const VectorCountOptions& opt);
// Distinct gamma v with ||gamma v|| < T (strict).  Throws FrontierExplosion at max_vectors.
VectorCountResult orbit_vector_count(const GeneratorSet& gens, const Quadruple& v, double T,
                                     const VectorCountOptions& opt = {});

// ---- group balls ----------------------------------------------------------------

enum class PruneMode { Auto, Unconjugated, Conjugated };

struct BallOptions {
  double safety = 4.0;
  // Auto prunes on the conjugated norm when the conjugated basepoint lies in the
  // chamber of a reflection group, and on the unconjugated norm otherwise.
  PruneMode prune = PruneMode::Auto;
  std::size_t max_visits = 200'000'000;
  int workers = 1;
  int split_depth = 6;
  bool even_only = true;
};

struct BallElement {
  double norm = 1.0;      // Lorentz norm of the conjugated element
  double t = 0.0;
  lie::Vec3 dir1 = lie::Vec3::UnitX();
  lie::Vec3 dir2 = lie::Vec3::UnitX();
  lie::EulerAngles right{};   // Euler angles of k2^{-1} w
  int word_length = 0;
  int first_letter = -1;      // leftmost (last applied) generator
};

struct GroupBall {
  double T = 0.0;
  lie::Mat4 conjugator = lie::Mat4::Identity();
  std::vector<BallElement> elements;   // traversal order, degenerate elements excluded
  std::size_t visited = 0;
  std::size_t degenerate = 0;          // norm < T but t below the KAK threshold
  std::size_t duplicate_fingerprints = 0;
  bool form_exact = true;              // every output matrix preserved the integral form
  bool conjugated_pruning = false;
  double safety_effective = 0.0;
  double min_pruned_norm = 0.0;        // smallest conjugated norm over pruned nodes (inf if none)

  std::vector<BallElement> within(double T) const;
  std::size_t count_within(double T) const;
};

// Elements gamma of g^{-1} Gamma g with lorentz_norm < T.  The depth-first
// expansion extends reduced words on the left, along which the norm seen from
// any point of the chamber is monotone.  A node is pruned once its conjugated
// norm exceeds T * safety (basepoint in the chamber), or else once its
// unconjugated norm exceeds T * max(safety, |g|^2).
GroupBall group_ball(const GeneratorSet& gens, const lie::LorentzMatrix& g, double T,
                     const BallOptions& opt = {});

// Default conjugator: its basepoint lies in the open Apollonian chamber, about
// 1.5 away from j.
lie::LorentzMatrix default_conjugator();

}  // namespace orbitcount::orbit
