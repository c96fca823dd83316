#pragma once

// Spherical harmonics on K/M = S^2 and Wigner-type functions on K = SO(3),
// normalized against probability Haar measure, plus the bisector product.

#include <complex>

#include "orbitcount/lie.hpp"

namespace orbitcount::harmonics {

using Complex = std::complex<double>;

struct HarmonicIndex {
  int a = 0;
  int b = 0;
  int c = 0;
};

// (a, b) belong to the factor read from k2, (ap, bp) to the factor read from k1;
// c is the shared M-weight.
struct BisectorIndex {
  int a = 0;
  int b = 0;
  int ap = 0;
  int bp = 0;
  int c = 0;
};

// Throws ConfigError when |b| > a, |c| > a or a < 0.
void validate(const HarmonicIndex& idx);
void validate(const BisectorIndex& idx);

// Wigner small-d d^j_{m' m}(beta) with the Condon-Shortley phase.
double wigner_d(int j, int mp, int m, double beta);

// Y_ab(theta, phi) = sqrt(4 pi) * standard orthonormal harmonic.
Complex sph_harm(int a, int b, double theta, double phi);
Complex sph_harm(int a, int b, const lie::Vec3& unit);

// Y_{a;bc}(phi, theta, phi2) = sqrt(2a+1) e^{i b phi} d^a_{bc}(theta) e^{i c phi2}.
Complex gen_sph_harm(const HarmonicIndex& idx, double phi, double theta, double phi2);
// Evaluates at the rotation with the given Euler angles (alpha, beta, gamma).
Complex gen_sph_harm(const HarmonicIndex& idx, const lie::EulerAngles& e);

// Euler angles of the M\K side of a KAK decomposition, read through the Weyl
// element w: the rotation k2^{-1} w, whose e1-image is -dir2 = dir1(g^{-1}).
lie::EulerAngles right_factor_angles(const lie::KAKData& k);

// Y_{a';b'c}(k1) * conj(Y_{a;b,-c}(k2^{-1} w)).  For c = 0 this is
// Y_{a'b'}(dir1) * conj(Y_{ab}(-dir2)).  Invariant under k1 -> k1 m, k2 -> m^{-1} k2.
// Throws DegenerateRotation if c != 0 and t is below the degeneracy threshold.
Complex bisector_harmonic(const BisectorIndex& idx, const lie::KAKData& k);
// Same value from stored angles (used by the orbit/ps pipelines).
Complex bisector_harmonic(const BisectorIndex& idx, const lie::Vec3& dir1,
                          const lie::EulerAngles& right);

}  // namespace orbitcount::harmonics
