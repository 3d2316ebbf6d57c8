#include "ebench/dv_benchmark.hpp"

#include <cmath>

namespace ebench::dv {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

GeneralizedPauli gen_pauli(int d) {
  require(d >= 2, "gen_pauli: d must be >= 2");
  GeneralizedPauli p;
  p.d = d;
  p.omega = 2.0 * pi / d;
  p.Z = CMatrix::Zero(d, d);
  p.X = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    p.Z(j, j) = std::polar(1.0, p.omega * j);
    p.X((j + 1) % d, j) = 1.0;
  }
  CMatrix zd = CMatrix::Identity(d, d), xd = CMatrix::Identity(d, d);
  for (int i = 0; i < d; ++i) {
    zd = zd * p.Z;
    xd = xd * p.X;
  }
  const CMatrix id = CMatrix::Identity(d, d);
  if (max_abs(zd - id) > 1e-12 || max_abs(xd - id) > 1e-12 ||
      max_abs(p.X * p.Z - std::polar(1.0, -p.omega) * p.Z * p.X) > 1e-12) {
    throw NumericalFailure("gen_pauli: Weyl relations violated");
  }
  return p;
}

MubBases mub_bases(int d) {
  require(d >= 2, "mub_bases: d must be >= 2");
  MubBases m;
  m.computational = CMatrix::Identity(d, d);
  m.fourier.resize(d, d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < d; ++l) {
    for (int j = 0; j < d; ++j) m.fourier(j, l) = std::polar(s, 2.0 * pi * static_cast<double>((l * j) % d) / d);
  }
  return m;
}

double g_value(int k, int d) {
  require(d >= 2, "g_value: d must be >= 2");
  require(k >= 1 && k <= d, "g_value: k must lie in [1, d]");
  return ((d - k) * std::cos(2.0 * pi / d) + d + k) / d;
}

CMatrix schmidt_witness_matrix(int k, int d) {
  require(k >= 1 && k <= d - 1, "schmidt_witness_matrix: k must lie in [1, d-1]");
  const GeneralizedPauli p = gen_pauli(d);
  auto kron = [](const CMatrix& x, const CMatrix& y) {
    CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
    return out;
  };
  const CMatrix zd = p.Z.adjoint(), xd = p.X.adjoint();
  CMatrix w = g_value(k, d) * CMatrix::Identity(d * d, d * d) -
              0.5 * (kron(p.Z, zd) + kron(zd, p.Z) + kron(p.X, p.X) + kron(xd, xd));
  return 0.5 * (w + w.adjoint());
}

witness::QuditPairWitness schmidt_witness_pairs(int k, int d) {
  require(k >= 1 && k <= d - 1, "schmidt_witness_pairs: k must lie in [1, d-1]");
  const GeneralizedPauli p = gen_pauli(d);
  const Complex i(0.0, 1.0);
  const CMatrix zr = 0.5 * (p.Z + p.Z.adjoint()), zi = (p.Z - p.Z.adjoint()) / (2.0 * i);
  const CMatrix xr = 0.5 * (p.X + p.X.adjoint()), xi = (p.X - p.X.adjoint()) / (2.0 * i);
  const CMatrix id = CMatrix::Identity(d, d);
  witness::QuditPairWitness w;
  w.pairs.push_back({g_value(k, d) * id, id});
  for (const auto& [a, b] : {std::pair{CMatrix(-zr), zr}, std::pair{CMatrix(-zi), zi}, std::pair{CMatrix(-xr), xr},
                             std::pair{xi, xi}}) {
    if (a.norm() > 1e-14 && b.norm() > 1e-14) w.pairs.push_back({a, b});
  }
  return w;
}

SchmidtBenchReport schmidt_benchmark(const channels::Channel& channel, int k) {
  const int d = channel.input().dim;
  require(channel.output().dim == d, "schmidt_benchmark: channel must map the qudit onto itself");
  require(d >= 2, "schmidt_benchmark: d must be >= 2");
  require(k >= 1 && k <= d - 1, "schmidt_benchmark: k must lie in [1, d-1]");
  const GeneralizedPauli p = gen_pauli(d);
  const MubBases mub = mub_bases(d);
  CMatrix minus(d, d);  // column j = |(-j) bar>
  for (int j = 0; j < d; ++j) minus.col(j) = mub.fourier.col((d - j) % d);

  const CVector z = channel.observable_response(p.Z, mub.computational);
  const CVector zd = channel.observable_response(p.Z.adjoint(), mub.computational);
  const CVector x = channel.observable_response(p.X, minus);
  const CVector xd = channel.observable_response(p.X.adjoint(), minus);
  const RVector tz = channel.output_traces(mub.computational);
  const RVector tx = channel.output_traces(minus);

  Complex s = 0.0;
  double tr = 0.0;
  for (int j = 0; j < d; ++j) {
    const Complex ph = std::polar(1.0, -p.omega * j);
    s += ph * z(j) + std::conj(ph) * zd(j) + ph * x(j) + std::conj(ph) * xd(j);
    tr += tz(j) + tx(j);
  }
  const double ps = tr / (2.0 * d);
  if (!(ps >= 1e-12)) throw NumericalFailure("schmidt_benchmark: P_s below 1e-12");

  SchmidtBenchReport r;
  r.k = k;
  r.d = d;
  r.P_s = ps;
  r.g = g_value(k, d);
  r.value = s.real() / (2.0 * d * ps);
  r.imag = s.imag() / (2.0 * d * ps);
  r.raw_value = 2.0 * r.value;
  r.margin = r.g - r.value;
  r.raw_margin = ps * r.margin;
  return r;
}

Conversion finite_dim_conversion(const witness::QuditPairWitness& w, const fock::Operator& psi) {
  Conversion c;
  c.ensemble = witness::pair_ensemble(w, psi);
  c.evaluate = [w, ens = c.ensemble](const channels::Channel& ch) { return witness::eb_value(w, ens, ch); };
  return c;
}

Conversion finite_dim_conversion(const witness::QuditPairWitness& w, const fock::Operator& psi,
                                 const std::vector<CMatrix>& bases, const std::vector<RVector>& evals) {
  Conversion c;
  c.ensemble = witness::pair_ensemble(w, psi, bases, evals);
  c.evaluate = [w, ens = c.ensemble](const channels::Channel& ch) { return witness::eb_value(w, ens, ch); };
  return c;
}

}  // namespace ebench::dv
