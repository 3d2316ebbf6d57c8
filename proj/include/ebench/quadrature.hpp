#pragma once
// Gauss rules (Golub-Welsch + Newton polish, weights from Christoffel sums so
// tiny tail weights keep full relative accuracy) and the polar grids used for
// d^2 alpha / pi integrals over the complex plane.

#include <vector>

#include "ebench/core.hpp"

namespace ebench::quad {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  /// log(weights[i]); finite even where weights[i] underflows.
  std::vector<double> log_weights;
};

/// Generalized Gauss-Laguerre: sum_i w_i f(x_i) ~ int_0^inf x^a e^{-x} f(x) dx.
GaussRule gauss_laguerre(int n, double a = 0.0);

/// Gauss-Legendre on [lo, hi].
GaussRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Polar grid over the complex plane.
///
/// `weights` integrate against the grid's own probability density:
///   gaussian: (lambda/pi) e^{-lambda |a|^2} d^2a     (radial rule in t = lambda r^2)
///   flat:     uniform density on the disk |a| <= alpha_max
/// `log_measure` integrates against the flat measure d^2a / pi.
struct QuadratureGrid {
  enum class Kind { gaussian, flat };

  Kind kind = Kind::gaussian;
  double lambda = 1.0;
  double alpha_max = 0.0;
  int radial_count = 0;
  int angular_count = 0;
  // (r, weight) pairs of the radial rule; weights sum to 1.
  std::vector<double> radial_nodes;
  std::vector<double> radial_weights;

  std::vector<Complex> nodes;
  std::vector<double> weights;
  std::vector<double> log_measure;

  std::size_t size() const { return nodes.size(); }
  double measure(std::size_t i) const;
};

QuadratureGrid gaussian_grid(double lambda, int radial_count, int angular_count);
QuadratureGrid flat_disk_grid(double alpha_max, int radial_count, int angular_count);

}  // namespace ebench::quad
