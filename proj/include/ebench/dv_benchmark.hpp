#pragma once
// Qudit arm: generalized Pauli operators, the Z / Fourier bases, the
// Schmidt-number witness and its two-basis channel benchmark, plus the
// generic pair-decomposition conversion.

#include <functional>

#include "ebench/channels.hpp"
#include "ebench/fock.hpp"
#include "ebench/witness.hpp"

namespace ebench::dv {

struct GeneralizedPauli {
  int d = 0;
  double omega = 0.0;  // 2 pi / d
  CMatrix Z;           // diag(e^{i omega j})
  CMatrix X;           // |j+1 mod d><j|
};

/// Throws InvalidArgument for d < 2 and NumericalFailure if the algebraic
/// relations fail to 1e-12.
GeneralizedPauli gen_pauli(int d);

struct MubBases {
  CMatrix computational;  // column j = |j>
  CMatrix fourier;        // column l = Z^l |0bar>, |0bar> = d^{-1/2} sum_j |j>
};
MubBases mub_bases(int d);

/// [(d - k) cos(2 pi / d) + d + k] / d, 1 <= k <= d.
double g_value(int k, int d);

/// g I - (Z (x) Z^dag + Z^dag (x) Z + X (x) X + X^dag (x) X^dag) / 2.
CMatrix schmidt_witness_matrix(int k, int d);

/// The same operator as Hermitian pairs: g I(x)I, -Zr(x)Zr, -Zi(x)Zi,
/// -Xr(x)Xr, +Xi(x)Xi with Z = Zr + i Zi, X = Xr + i Xi.
witness::QuditPairWitness schmidt_witness_pairs(int k, int d);

struct SchmidtBenchReport {
  /// (1/P_s) (1/2d) sum_j tr[(Z e^{-iwj} + h.c.) E(|j><j|) + (X e^{-iwj} + h.c.) E(|-j bar><-j bar|)]
  double value = 0.0;
  /// The same sum without the 1/2 (twice `value`).
  double raw_value = 0.0;
  double g = 0.0;
  /// g - value; negative certifies a Kraus operator of rank >= k + 1.
  double margin = 0.0;
  /// P_s g - P_s value
  double raw_margin = 0.0;
  double P_s = 0.0;
  double imag = 0.0;
  int k = 0;
  int d = 0;
};

SchmidtBenchReport schmidt_benchmark(const channels::Channel& channel, int k);

/// Pair ensemble of psi plus an evaluator for any channel on system A.
struct Conversion {
  witness::InputEnsemble ensemble;
  std::function<witness::EBValue(const channels::Channel&)> evaluate;
};

/// h_l are eigen-decomposed; degenerate clusters get an arbitrary basis.
Conversion finite_dim_conversion(const witness::QuditPairWitness& w, const fock::Operator& psi);

/// Same, but with user-supplied eigenbases (column j of bases[l] is the
/// eigenvector of h_l with eigenvalue evals[l](j)).
Conversion finite_dim_conversion(const witness::QuditPairWitness& w, const fock::Operator& psi,
                                 const std::vector<CMatrix>& bases, const std::vector<RVector>& evals);

}  // namespace ebench::dv
