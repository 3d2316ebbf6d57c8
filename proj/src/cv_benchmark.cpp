#include "ebench/cv_benchmark.hpp"

#include <cmath>

namespace ebench::cv {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

const char* kOrientation =
    "F_avg <= P_s (1+lambda)/(1+lambda+eta), i.e. 1/u^2 = (1+lambda+eta)/(1+lambda) with u^2+v^2 = 1";

}  // namespace

GaussianBenchParams GaussianBenchParams::from_lambda_eta(double lambda, double eta, double X) {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(eta >= 0.0 && std::isfinite(eta), "eta must be >= 0");
  require(X >= 0.0 && std::isfinite(X), "X must be >= 0");
  const double denom = 1.0 + lambda - X * eta;
  const double s = (1.0 + X) / denom;
  require(denom > 0.0 && s < 1.0, "lambda must exceed X (1 + eta)");
  GaussianBenchParams p;
  p.lambda = lambda;
  p.eta = eta;
  p.X = X;
  p.xi = std::sqrt(s);
  p.u2 = 1.0 / (1.0 + eta * s);
  p.v2 = 1.0 - p.u2;
  return p;
}

GaussianBenchParams GaussianBenchParams::from_witness(double xi, double u2, double X) {
  require(xi > 0.0 && xi < 1.0, "xi must lie in (0, 1)");
  require(u2 > 0.0 && u2 <= 1.0, "u2 must lie in (0, 1]");
  require(X >= 0.0 && std::isfinite(X), "X must be >= 0");
  GaussianBenchParams p;
  p.xi = xi;
  p.u2 = u2;
  p.v2 = 1.0 - u2;
  p.X = X;
  const double s = xi * xi;
  p.lambda = (X / u2 + 1.0 - s) / s;
  p.eta = p.v2 / (s * u2);
  return p;
}

void GaussianBenchParams::validate() const {
  require(lambda >= 0.0 && eta >= 0.0 && X >= 0.0, "lambda, eta and X must be >= 0");
  require(xi > 0.0 && xi < 1.0, "xi must lie in (0, 1)");
  require(u2 > 0.0 && u2 <= 1.0, "u2 must lie in (0, 1]");
  require(std::abs(u2 + v2 - 1.0) <= 1e-12, "u2 + v2 must equal 1");
  const double s = xi * xi;
  require(std::abs(lambda - (X / u2 + 1.0 - s) / s) <= 1e-12 * std::max(1.0, lambda),
          "lambda inconsistent with xi, u2, X");
  require(std::abs(eta - v2 / (s * u2)) <= 1e-12 * std::max(1.0, eta), "eta inconsistent with xi, u2");
}

double benchmark_threshold(double lambda, double eta) {
  require(lambda >= 0.0 && eta >= 0.0 && std::isfinite(lambda) && std::isfinite(eta),
          "benchmark_threshold: lambda and eta must be finite and >= 0");
  return (1.0 + lambda) / (1.0 + lambda + eta);
}

double heterodyne_optimal_gain(double lambda, double eta) {
  require(lambda >= 0.0 && eta >= 0.0, "heterodyne_optimal_gain: negative parameter");
  return std::sqrt(eta) / (1.0 + lambda);
}

quad::QuadratureGrid make_grid(double lambda, const GridSpec& spec) {
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
  require(spec.radial >= 1 && spec.angular >= 1, "grid node counts must be positive");
  if (lambda == 0.0) {
    return quad::flat_disk_grid(spec.alpha_max > 0.0 ? spec.alpha_max : kDefaultFlatRadius, spec.radial,
                                spec.angular);
  }
  return quad::gaussian_grid(lambda, spec.radial, spec.angular);
}

witness::InputEnsemble gaussian_coherent_ensemble(double lambda, const quad::QuadratureGrid& grid,
                                                  const fock::Space& space) {
  require(lambda >= 0.0 && std::isfinite(lambda), "gaussian_coherent_ensemble: lambda must be >= 0");
  const bool flat = lambda == 0.0;
  require(!flat || grid.kind == quad::QuadratureGrid::Kind::flat,
          "gaussian_coherent_ensemble: lambda = 0 needs a flat cut-radius grid");
  witness::InputEnsemble ens;
  ens.space = space;
  ens.source = flat ? "flat coherent ensemble" : "gaussian coherent ensemble";
  const bool own = grid.kind == quad::QuadratureGrid::Kind::gaussian && grid.lambda == lambda;
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex alpha = grid.nodes[i];
    const double a2 = std::norm(alpha);
    double w;
    if (flat || own) {
      w = grid.weights[i];
    } else {
      w = std::exp(grid.log_measure[i] + std::log(lambda) - lambda * a2);
    }
    total += w;
    const double tail = fock::coherent_tail(a2, space.cutoff());
    if (tail > 1e-2) {
      ens.dropped_weight += w;
      continue;
    }
    fock::StateVector k = fock::coherent_ket(alpha, space);
    witness::Member m;
    m.weight = w;
    m.factor = k.amplitudes / k.amplitudes.norm();
    m.alpha = alpha;
    m.has_alpha = true;
    ens.truncation_error += w * tail;
    ens.members.push_back(std::move(m));
  }
  ens.quadrature_error = std::abs(total - 1.0);
  return ens;
}

FidelityBenchReport fidelity_benchmark(const channels::Channel& channel, double lambda, double eta,
                                       const quad::QuadratureGrid& grid, const fock::Space& space) {
  require(eta >= 0.0 && std::isfinite(eta), "fidelity_benchmark: eta must be >= 0");
  require(channel.input().dim == space.dim && channel.output().dim == space.dim,
          "fidelity_benchmark: channel does not act on the given space");
  const witness::InputEnsemble ens = gaussian_coherent_ensemble(lambda, grid, space);
  if (ens.members.empty()) throw NumericalFailure("fidelity_benchmark: every node was dropped");

  const auto n = static_cast<Eigen::Index>(ens.members.size());
  CMatrix kets(space.dim, n), targets(space.dim, n);
  const double g = std::sqrt(eta);
  double target_defect = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = ens.members[i];
    kets.col(i) = m.factor.col(0);
    const fock::StateVector t = fock::coherent_ket(g * m.alpha, space);
    targets.col(i) = t.amplitudes;
    target_defect += m.weight * t.truncation_defect;
  }
  const RVector fid = channel.target_response(kets, targets);
  const RVector tr = channel.output_traces(kets);
  double F = 0.0, P = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    F += ens.members[i].weight * fid(i);
    P += ens.members[i].weight * tr(i);
  }
  if (!(P >= 1e-12)) throw NumericalFailure("fidelity_benchmark: P_s below 1e-12");

  FidelityBenchReport r;
  r.F_avg = F;
  r.P_s = P;
  r.threshold = benchmark_threshold(lambda, eta);
  r.margin = r.threshold - F / P;
  r.raw_margin = P * r.threshold - F;
  r.truncation_error = ens.truncation_error + target_defect;
  r.dropped_weight = ens.dropped_weight;
  r.error_estimate = (r.truncation_error + r.dropped_weight + ens.quadrature_error) / P;
  r.lambda = lambda;
  r.eta = eta;
  r.flat = lambda == 0.0;
  r.alpha_max = grid.alpha_max;
  r.radial = grid.radial_count;
  r.angular = grid.angular_count;
  r.cutoff = space.cutoff();
  r.orientation = kOrientation;
  return r;
}

FidelityBenchReport fidelity_benchmark(const channels::Channel& channel, double lambda, double eta,
                                       const fock::Space& space, const GridSpec& grid) {
  FidelityBenchReport full = fidelity_benchmark(channel, lambda, eta, make_grid(lambda, grid), space);
  GridSpec half = grid;
  half.radial = std::max(1, grid.radial / 2);
  half.angular = std::max(1, grid.angular / 2);
  const FidelityBenchReport coarse = fidelity_benchmark(channel, lambda, eta, make_grid(lambda, half), space);
  full.quadrature_error = std::abs(full.margin - coarse.margin);
  full.error_estimate += full.quadrature_error;
  return full;
}

witness::CoherentIntegralWitness fidelity_witness(double X, double u2, double v2) {
  require(X >= 0.0 && std::isfinite(X), "fidelity_witness: X must be >= 0");
  require(u2 > 0.0 && u2 <= 1.0, "fidelity_witness: u2 must lie in (0, 1]");
  require(std::abs(u2 + v2 - 1.0) <= 1e-12, "fidelity_witness: u2 + v2 must equal 1");
  const double v_over_u = std::sqrt(v2 / u2);
  witness::CoherentIntegralWitness w;
  w.name = "fidelity_witness";
  w.constant = 1.0 / (1.0 + X);
  w.kernel = [X, u2](Complex b) { return std::exp(-X * std::norm(b) / u2) / u2; };
  w.family = [v_over_u](Complex b) { return v_over_u * b; };
  w.decay = (1.0 + X) / u2;
  w.linear_family = Complex(v_over_u, 0.0);
  return w;
}

fock::Operator regulated_witness_matrix(double X, double u2, double v2, const fock::Space& a, const fock::Space& b,
                                const quad::QuadratureGrid* grid) {
  return witness::assemble_witness(fidelity_witness(X, u2, v2), {a, b}, grid);
}

RegulatedWitnessValue regulated_witness_value(const channels::Channel& channel, double xi, double u2, double X,
                               const fock::Space& space, const GridSpec& grid) {
  const GaussianBenchParams at_x = GaussianBenchParams::from_witness(xi, u2, X);
  const GaussianBenchParams at_0 = GaussianBenchParams::from_witness(xi, u2, 0.0);
  const FidelityBenchReport f = fidelity_benchmark(channel, at_x.lambda, at_x.eta, make_grid(at_x.lambda, grid), space);
  const FidelityBenchReport ref =
      X == 0.0 ? f : fidelity_benchmark(channel, at_0.lambda, at_0.eta, make_grid(at_0.lambda, grid), space);
  const double s = xi * xi;
  RegulatedWitnessValue out;
  out.lambda = at_x.lambda;
  out.eta = at_x.eta;
  out.F_avg = f.F_avg;
  out.P_s = ref.P_s;
  out.value = 1.0 / (1.0 + X) - (1.0 - s) / (s * u2 * at_x.lambda) * f.F_avg / ref.P_s;
  out.error_estimate = f.error_estimate + ref.error_estimate;
  return out;
}

witness::ChoiExpectation regulated_witness_choi_value(const channels::Channel& channel, double xi, double u2, double X,
                                              const fock::Space& a, const fock::Space& b) {
  const fock::StateVector psi = fock::two_mode_squeezed_ket(xi, a, b);
  const channels::ChoiState cs = channels::choi_state(channel, psi);
  return witness::choi_witness_expectation(fidelity_witness(X, u2, 1.0 - u2), cs);
}

double richardson_limit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && !x.empty(), "richardson_limit: need matching, nonempty samples");
  std::vector<double> p = y;
  const std::size_t n = x.size();
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = 0; i + k < n; ++i) {
      p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
    }
  }
  return p[0];
}

}  // namespace ebench::cv
