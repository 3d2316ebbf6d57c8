#pragma once
// Coherent-state fidelity benchmark with Gaussian (or flat) input ensembles
// and the regulated fidelity witness it descends from.

#include <string>
#include <vector>

#include "ebench/channels.hpp"
#include "ebench/fock.hpp"
#include "ebench/quadrature.hpp"
#include "ebench/witness.hpp"

namespace ebench::cv {

/// Witness parameters (xi, u2, v2 = 1 - u2, X) and the ensemble parameters
/// they induce:
///   lambda = xi^-2 (X / u2 + 1 - xi^2),   eta = v2 / (xi^2 u2).
struct GaussianBenchParams {
  double lambda = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  double X = 0.0;
  double u2 = 1.0;
  double v2 = 0.0;

  /// Solves for xi and u2; requires lambda > X (1 + eta).
  static GaussianBenchParams from_lambda_eta(double lambda, double eta, double X = 0.0);
  static GaussianBenchParams from_witness(double xi, double u2, double X = 0.0);
  /// Throws InvalidArgument when the relations above fail to 1e-12.
  void validate() const;
};

/// (1 + lambda) / (1 + lambda + eta)
double benchmark_threshold(double lambda, double eta);

/// Re-preparation gain that saturates the threshold: sqrt(eta) / (1 + lambda).
double heterodyne_optimal_gain(double lambda, double eta);

struct GridSpec {
  int radial = 64;
  int angular = 64;
  /// Cut radius of the flat (lambda = 0) ensemble; 0 selects the default.
  double alpha_max = 0.0;
};

constexpr double kDefaultFlatRadius = 4.0;

/// Gaussian grid in t = lambda |a|^2 for lambda > 0, flat disk for lambda = 0.
quad::QuadratureGrid make_grid(double lambda, const GridSpec& spec);

/// Members |a> (truncated and renormalized) at the grid nodes with weights
/// (lambda/pi) e^{-lambda |a|^2} d^2a; lambda = 0 takes the flat grid weights.
/// Nodes whose truncation defect exceeds 1e-2 are dropped with accounting.
witness::InputEnsemble gaussian_coherent_ensemble(double lambda, const quad::QuadratureGrid& grid,
                                                  const fock::Space& space);

struct FidelityBenchReport {
  double F_avg = 0.0;
  double P_s = 0.0;
  double threshold = 0.0;
  /// threshold - F_avg / P_s; negative certifies a non-EB channel.
  double margin = 0.0;
  /// P_s * threshold - F_avg
  double raw_margin = 0.0;
  double quadrature_error = 0.0;
  double truncation_error = 0.0;
  double dropped_weight = 0.0;
  double error_estimate = 0.0;  // bound on |margin| error

  double lambda = 0.0;
  double eta = 0.0;
  bool flat = false;
  double alpha_max = 0.0;
  int radial = 0;
  int angular = 0;
  int cutoff = 0;
  std::string orientation;
};

/// Single grid evaluation; quadrature_error stays 0.
FidelityBenchReport fidelity_benchmark(const channels::Channel& channel, double lambda, double eta,
                                       const quad::QuadratureGrid& grid, const fock::Space& space);

/// Also evaluates on the half grid and reports the difference as the
/// quadrature error.
FidelityBenchReport fidelity_benchmark(const channels::Channel& channel, double lambda, double eta,
                                       const fock::Space& space, const GridSpec& grid = {});

/// W = I/(1+X) - int d^2b/pi (1/u2) e^{-X|b|^2/u2} |v b/u><v b/u| (x) |b*><b*|,
/// i.e. the integral over |v a><v a| (x) |u a*><u a*| after b = u a.
witness::CoherentIntegralWitness fidelity_witness(double X, double u2, double v2);

/// Explicit matrix on A (x) B. Without a grid, the exact Gauss-Laguerre rule
/// for the truncated spaces is used (also at X = 0).
fock::Operator regulated_witness_matrix(double X, double u2, double v2, const fock::Space& a, const fock::Space& b,
                                const quad::QuadratureGrid* grid = nullptr);

/// Witness value on the two-mode squeezed reference expressed through the
/// fidelity benchmark at the induced lambda(X):
///   1/(1+X) - (1 - xi^2) / (xi^2 u2 lambda) * F_avg(lambda, eta) / P_s,
/// with P_s taken over the reference ensemble (lambda at X = 0).
struct RegulatedWitnessValue {
  double value = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
  double F_avg = 0.0;
  double P_s = 0.0;
  double error_estimate = 0.0;
};
RegulatedWitnessValue regulated_witness_value(const channels::Channel& channel, double xi, double u2, double X,
                               const fock::Space& space, const GridSpec& grid = {});

/// tr[W J] / P_s with J = (E (x) I)(psi_xi) on spaces a (output) and b (reference).
witness::ChoiExpectation regulated_witness_choi_value(const channels::Channel& channel, double xi, double u2, double X,
                                              const fock::Space& a, const fock::Space& b);

/// Polynomial extrapolation of y(x) to x = 0 (Neville).
double richardson_limit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ebench::cv
