#pragma once
// Truncated Fock spaces, qudit spaces and dense states/operators over
// ordered products of tagged spaces.
//
// Composite index convention: the first space in a layout is the most
// significant digit, i.e. |i_A, i_B> sits at i_A * dim_B + i_B.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebench/core.hpp"

namespace ebench::fock {

struct Space {
  std::string tag;
  int dim = 0;
  bool is_fock = true;

  int cutoff() const { return dim - 1; }
  bool operator==(const Space&) const = default;
};

using Layout = std::vector<Space>;

/// Fock space |0>..|cutoff>. Throws InvalidArgument when cutoff < 1.
Space fock_space(std::string tag, int cutoff);
Space qudit_space(std::string tag, int d);

int total_dim(const Layout& layout);

/// Cutoff keeping coherent tails of amplitude^2 <= max_abs2 below 1e-10:
/// max(20, ceil(M + 6 sqrt(M))), raised further until the tail bound holds.
int recommended_cutoff(double max_abs2);

/// Poisson tail e^{-x} sum_{n>cutoff} x^n / n!, computed directly.
double coherent_tail(double abs2, int cutoff);

struct StateVector {
  Layout layout;
  CVector amplitudes;
  /// Probability weight lost to truncation (0 when the state is exact).
  double truncation_defect = 0.0;
  /// Set when truncation_defect exceeds 1e-8.
  bool truncation_warning = false;

  double norm() const { return amplitudes.norm(); }
};

struct Operator {
  Layout layout;
  CMatrix matrix;

  Complex trace() const { return matrix.trace(); }
  /// max |M - M^dagger| entrywise.
  double hermiticity_defect() const;
  int dim() const { return static_cast<int>(matrix.rows()); }
};

using DensityOperator = Operator;

enum class ModeKind { annihilation, creation, displacement, general };

struct ModeOperator {
  Operator op;
  ModeKind kind = ModeKind::general;
};

struct LadderPair {
  ModeOperator annihilation;
  ModeOperator creation;
};

StateVector coherent_ket(Complex alpha, const Space& space);

/// Coherent amplitudes without the e^{-|alpha|^2/2} factor: alpha^n / sqrt(n!).
CVector bargmann_vector(Complex alpha, int dim);

StateVector two_mode_squeezed_ket(double xi, const Space& a, const Space& b);
StateVector basis_ket(const Space& space, int n);
/// d^{-1/2} sum_j |j>|j> over min(dim_a, dim_b) levels.
StateVector maximally_entangled_ket(const Space& a, const Space& b);

LadderPair mode_operators(const Space& space);
Operator identity(const Layout& layout);

StateVector tensor(const StateVector& x, const StateVector& y);
Operator tensor(const Operator& x, const Operator& y);
ModeOperator tensor(const ModeOperator& x, const ModeOperator& y);

Operator projector(const StateVector& psi);

Operator partial_trace(const Operator& rho, std::string_view keep);
Operator partial_trace(const Operator& rho, const std::vector<std::string>& keep);
Operator partial_transpose(const Operator& rho, std::string_view tag);

Complex expectation(const Operator& op, const Operator& rho);
Complex expectation(const Operator& op, const StateVector& psi);

/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const CMatrix& hermitian);

/// Returns the state vector when rho is rank one (tr rho^2 = (tr rho)^2 to tol).
std::optional<StateVector> as_pure(const Operator& rho, double tol = 1e-12);

/// rho = F F^dagger with F built from the eigen-decomposition (rank-one inputs
/// skip the decomposition).
CMatrix factorize(const Operator& rho, double rel_cutoff = 1e-15);

/// Index of a tag in the layout, throws InvalidArgument when absent.
std::size_t find_tag(const Layout& layout, std::string_view tag);

}  // namespace ebench::fock
