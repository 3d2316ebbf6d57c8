#include "ebench/quadrature.hpp"

#include <cmath>
#include <functional>

namespace ebench::quad {
namespace {

constexpr double kRescale = 1e100;

// Three-term recurrence of the orthonormal family:
//   sb[k+1] p_{k+1} = (x - a[k]) p_k - sb[k] p_{k-1},   p_0 = 1.
struct Jacobi {
  std::vector<double> a;   // a[0..n-1]
  std::vector<double> sb;  // sb[0] unused, sb[1..n]
  double log_mu0 = 0.0;
};

// Returns p_n(x) / p_n'(x) for the Newton step.
double newton_ratio(const Jacobi& j, int n, double x) {
  double p_prev = 0.0, p = 1.0;
  double d_prev = 0.0, d = 0.0;
  for (int k = 0; k < n; ++k) {
    const double sb_prev = k > 0 ? j.sb[k] : 0.0;
    const double p_next = ((x - j.a[k]) * p - sb_prev * p_prev) / j.sb[k + 1];
    const double d_next = (p + (x - j.a[k]) * d - sb_prev * d_prev) / j.sb[k + 1];
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
    const double m = std::max(std::abs(p), std::abs(d));
    if (m > kRescale) {
      p /= m;
      p_prev /= m;
      d /= m;
      d_prev /= m;
    }
  }
  return p / d;
}

// log sum_{k<n} p_k(x)^2
double log_christoffel_sum(const Jacobi& j, int n, double x) {
  double p_prev = 0.0, p = 1.0;
  double sum = 1.0;
  double log_scale = 0.0;  // true values = stored * exp(log_scale)
  for (int k = 0; k + 1 < n; ++k) {
    const double sb_prev = k > 0 ? j.sb[k] : 0.0;
    const double p_next = ((x - j.a[k]) * p - sb_prev * p_prev) / j.sb[k + 1];
    p_prev = p;
    p = p_next;
    sum += p * p;
    const double m = std::abs(p);
    if (m > kRescale) {
      p /= m;
      p_prev /= m;
      sum /= m * m;
      log_scale += std::log(m);
    }
  }
  return std::log(sum) + 2.0 * log_scale;
}

GaussRule solve(const Jacobi& j, int n) {
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) diag(k) = j.a[k];
  for (int k = 1; k < n; ++k) sub(k - 1) = j.sb[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.log_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      const double step = newton_ratio(j, n, x);
      if (!std::isfinite(step)) break;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    rule.nodes[i] = x;
    rule.log_weights[i] = j.log_mu0 - log_christoffel_sum(j, n, x);
    rule.weights[i] = std::exp(rule.log_weights[i]);
  }
  return rule;
}

}  // namespace

GaussRule gauss_laguerre(int n, double a) {
  if (n < 1) throw InvalidArgument("gauss_laguerre: need at least one node");
  if (!(a > -1.0)) throw InvalidArgument("gauss_laguerre: exponent must exceed -1");
  Jacobi j;
  j.a.resize(n);
  j.sb.assign(n + 1, 0.0);
  for (int k = 0; k < n; ++k) j.a[k] = 2.0 * k + 1.0 + a;
  for (int k = 1; k <= n; ++k) j.sb[k] = std::sqrt(k * (k + a));
  j.log_mu0 = std::lgamma(a + 1.0);
  return solve(j, n);
}

GaussRule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  if (!(hi > lo)) throw InvalidArgument("gauss_legendre: empty interval");
  Jacobi j;
  j.a.assign(n, 0.0);
  j.sb.assign(n + 1, 0.0);
  for (int k = 1; k <= n; ++k) j.sb[k] = k / std::sqrt(4.0 * k * k - 1.0);
  j.log_mu0 = std::log(2.0);
  GaussRule rule = solve(j, n);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = half * rule.nodes[i] + mid;
    rule.weights[i] *= half;
    rule.log_weights[i] += std::log(half);
  }
  return rule;
}

double QuadratureGrid::measure(std::size_t i) const { return std::exp(log_measure[i]); }

QuadratureGrid gaussian_grid(double lambda, int radial_count, int angular_count) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("gaussian_grid: lambda must be positive");
  }
  if (radial_count < 1 || angular_count < 1) {
    throw InvalidArgument("gaussian_grid: node counts must be positive");
  }
  const GaussRule rule = gauss_laguerre(radial_count);
  QuadratureGrid g;
  g.kind = QuadratureGrid::Kind::gaussian;
  g.lambda = lambda;
  g.radial_count = radial_count;
  g.angular_count = angular_count;
  const double log_nt = std::log(static_cast<double>(angular_count));
  for (int j = 0; j < radial_count; ++j) {
    const double t = rule.nodes[j];
    const double r = std::sqrt(t / lambda);
    g.radial_nodes.push_back(r);
    g.radial_weights.push_back(rule.weights[j]);
    for (int k = 0; k < angular_count; ++k) {
      const double theta = 2.0 * pi * k / angular_count;
      g.nodes.push_back(std::polar(r, theta));
      g.weights.push_back(rule.weights[j] / angular_count);
      g.log_measure.push_back(rule.log_weights[j] + t - std::log(lambda) - log_nt);
    }
  }
  g.alpha_max = g.radial_nodes.back();
  return g;
}

QuadratureGrid flat_disk_grid(double alpha_max, int radial_count, int angular_count) {
  if (!(alpha_max > 0.0) || !std::isfinite(alpha_max)) {
    throw InvalidArgument("flat_disk_grid: alpha_max must be positive and finite");
  }
  if (radial_count < 1 || angular_count < 1) {
    throw InvalidArgument("flat_disk_grid: node counts must be positive");
  }
  const double area = alpha_max * alpha_max;
  const GaussRule rule = gauss_legendre(radial_count, 0.0, area);
  QuadratureGrid g;
  g.kind = QuadratureGrid::Kind::flat;
  g.lambda = 0.0;
  g.alpha_max = alpha_max;
  g.radial_count = radial_count;
  g.angular_count = angular_count;
  const double log_nt = std::log(static_cast<double>(angular_count));
  for (int j = 0; j < radial_count; ++j) {
    const double r = std::sqrt(rule.nodes[j]);
    g.radial_nodes.push_back(r);
    g.radial_weights.push_back(rule.weights[j] / area);
    for (int k = 0; k < angular_count; ++k) {
      const double theta = 2.0 * pi * k / angular_count;
      g.nodes.push_back(std::polar(r, theta));
      g.weights.push_back(rule.weights[j] / (area * angular_count));
      g.log_measure.push_back(rule.log_weights[j] - log_nt);
    }
  }
  return g;
}

}  // namespace ebench::quad
