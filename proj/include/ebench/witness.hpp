#pragma once
// Witness -> EB-condition machinery: anti-normal reordering, coherent-state
// symbols, input ensembles induced by a reference state, and the two
// evaluation paths (ensemble average vs. direct Choi expectation).

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ebench/channels.hpp"
#include "ebench/core.hpp"
#include "ebench/fock.hpp"
#include "ebench/quadrature.hpp"

namespace ebench::witness {

/// coeff * b^n (b^dagger)^m
struct AntinormalMonomial {
  double coeff = 0.0;
  int n = 0;
  int m = 0;
};

/// (b^dagger)^m b^n = sum_k (-1)^k k! C(m,k) C(n,k) b^{n-k} (b^dagger)^{m-k}.
/// Coefficients are exact integers; throws InvalidArgument when n + m > 32.
std::vector<AntinormalMonomial> antinormal_reorder(int n, int m);

/// coeff * A (x) (b^dagger)^m b^n, normal ordered on mode B.
struct PolynomialTerm {
  CMatrix A;
  int n = 0;
  int m = 0;
  Complex coeff{1.0, 0.0};
};

struct PolynomialWitness {
  std::vector<PolynomialTerm> terms;
};

/// W = constant * I - int d^2b/pi kernel(b) |family(b)><family(b)| (x) |b*><b*|
/// with |family(b)> a coherent state on A. `decay` is the Gaussian rate of the
/// full integrand in |b|^2 and sets the assembly grid.
///
/// When `linear_family` is set, family(b) = linear_family * b and the kernel
/// is radial; W then conserves n_A - n_B and is assembled block-wise.
struct CoherentIntegralWitness {
  std::string name;
  double constant = 1.0;
  std::function<double(Complex)> kernel;
  std::function<Complex(Complex)> family;
  double decay = 1.0;
  std::optional<Complex> linear_family;
};

/// W = sum_l w_l (x) h_l with every h_l Hermitian.
struct QuditPair {
  CMatrix w;
  CMatrix h;
};

struct QuditPairWitness {
  std::vector<QuditPair> pairs;
};

using WitnessSpec = std::variant<PolynomialWitness, CoherentIntegralWitness, QuditPairWitness>;

/// alpha -> A-side operator (dimension a_dim).
using Symbol = std::function<CMatrix(Complex)>;
Symbol witness_symbol(const WitnessSpec& w, int a_dim);

struct Member {
  double weight = 0.0;
  /// Input state = factor * factor^dagger, trace 1.
  CMatrix factor;
  Complex alpha{0.0, 0.0};
  bool has_alpha = false;
  int j = -1;  // eigenvector index (finite-dimensional ensembles)
  int l = -1;  // pair index
  double h = 0.0;  // eigenvalue of h_l
};

struct InputEnsemble {
  fock::Space space;
  std::vector<Member> members;
  double dropped_weight = 0.0;
  double truncation_error = 0.0;
  double quadrature_error = 0.0;
  /// Number of complete decompositions of the reference state contained in
  /// `members` (one per pair for finite-dimensional ensembles).
  int groups = 1;
  std::string source;

  /// sum of weights / groups
  double normalization() const;
  double error_estimate() const { return dropped_weight + truncation_error + quadrature_error; }
};

/// Members p_a <a*|psi|a*>_B at the grid nodes (system B must be a Fock space).
/// Nodes with p_a < 1e-14 are dropped; their weight is recorded.
InputEnsemble ensemble_from_state(const fock::StateVector& psi, const quad::QuadratureGrid& grid);
InputEnsemble ensemble_from_state(const fock::Operator& psi, const quad::QuadratureGrid& grid);

/// Eigen-decomposes every h_l and conditions psi on the eigenvectors of B.
/// Members with p < 1e-14 are dropped with accounting.
InputEnsemble pair_ensemble(const QuditPairWitness& w, const fock::Operator& psi);
/// Same with caller-chosen eigenbases: h_l = bases[l] diag(evals[l]) bases[l]^dagger.
InputEnsemble pair_ensemble(const QuditPairWitness& w, const fock::Operator& psi,
                            const std::vector<CMatrix>& bases, const std::vector<RVector>& evals);

struct EBValue {
  double value = 0.0;
  double imag = 0.0;
  double P_s = 0.0;
  std::vector<Complex> contributions;  // weight * tr[symbol E(phi)] per member
  double error_estimate = 0.0;
};

/// (1/P_s) sum_i p_i tr[symbol(alpha_i) E(phi_i)], P_s = sum_i p_i tr E(phi_i).
/// Throws NumericalFailure when P_s < 1e-12.
EBValue eb_value(const WitnessSpec& w, const InputEnsemble& ens, const channels::Channel& channel);

struct NonlinearCondition {
  std::vector<WitnessSpec> symbols;
  /// Receives the normalized replacements <O_i> (real + i imag); condition is F >= 0.
  std::function<double(const std::vector<Complex>&)> combiner;
};

double nonlinear_eb_value(const NonlinearCondition& cond, const InputEnsemble& ens,
                          const channels::Channel& channel);

/// Explicit two-system matrix on layout {A, B}. Coherent-integral witnesses are
/// assembled by quadrature; without a grid a Gauss-Laguerre rule that is exact
/// on the truncated spaces is used.
fock::Operator assemble_witness(const WitnessSpec& w, const fock::Layout& layout,
                                const quad::QuadratureGrid* grid = nullptr);

/// tr[W J] / P_s (real part). Throws on P_s < 1e-12 or dimension mismatch.
struct ChoiExpectation {
  double value = 0.0;
  double imag = 0.0;
  double P_s = 0.0;
};
ChoiExpectation choi_witness_expectation(const WitnessSpec& w, const channels::ChoiState& cs);

struct Consistency {
  double ensemble_value = 0.0;
  double choi_value = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Both evaluation paths on the same reference state. Qudit-pair witnesses use
/// the eigen-decomposition ensemble and ignore the grid. Default tolerance
/// 1e-4 for CV witnesses, 1e-10 for qudit pairs.
Consistency consistency_check(const WitnessSpec& w, const fock::Operator& psi,
                              const channels::Channel& channel, const quad::QuadratureGrid& grid,
                              std::optional<double> tolerance = std::nullopt);

}  // namespace ebench::witness
