#pragma once
// Reference computations for the tests. Everything here is written from
// closed forms or brute-force constructions and does not call into the
// library's numerics.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
constexpr double pi = 3.14159265358979323846;

inline std::uint64_t test_seed() {
  if (const char* s = std::getenv("EBENCH_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end != s) return v;
  }
  return 20240611u;
}

/// e^{-|a|^2/2} a^n / sqrt(n!) term by term in long double.
inline CVector coherent(Complex a, int dim) {
  CVector v(dim);
  const long double r2 = std::norm(a);
  std::complex<long double> term(std::exp(-r2 / 2.0L), 0.0L);
  const std::complex<long double> al(a.real(), a.imag());
  for (int n = 0; n < dim; ++n) {
    v(n) = Complex(static_cast<double>(term.real()), static_cast<double>(term.imag()));
    term *= al / std::sqrt(static_cast<long double>(n + 1));
  }
  return v;
}

/// 1 - sum_{n <= c} e^{-x} x^n / n!
inline double poisson_tail(double x, int c) {
  long double term = std::exp(-static_cast<long double>(x)), s = 0.0L;
  for (int n = 0; n <= c; ++n) {
    s += term;
    term *= x / (n + 1.0L);
  }
  return static_cast<double>(1.0L - s);
}

inline CMatrix annihilation(int dim) {
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline CMatrix kron(const CMatrix& x, const CMatrix& y) {
  CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

inline CMatrix mpow(const CMatrix& m, int k) {
  CMatrix out = CMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = out * m;
  return out;
}

/// Pure loss Kraus operators from a beam-splitter unitary on signal (x)
/// environment, K_k = <k|_E U |0>_E. Exact in the truncated space because
/// U conserves total photon number.
inline std::vector<CMatrix> loss_kraus_beamsplitter(double tau, int dim) {
  const CMatrix a = kron(annihilation(dim), CMatrix::Identity(dim, dim));
  const CMatrix e = kron(CMatrix::Identity(dim, dim), annihilation(dim));
  const double theta = std::acos(std::sqrt(tau));
  const CMatrix gen = theta * (a.adjoint() * e - a * e.adjoint());
  const CMatrix U = gen.exp();
  std::vector<CMatrix> ks;
  for (int k = 0; k < dim; ++k) {
    CMatrix K = CMatrix::Zero(dim, dim);
    for (int out = 0; out < dim; ++out)
      for (int in = 0; in < dim; ++in) K(out, in) = U(out * dim + k, in * dim + 0);
    ks.push_back(K);
  }
  return ks;
}

inline CMatrix apply_kraus(const std::vector<CMatrix>& ks, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(ks[0].rows(), ks[0].rows());
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return out;
}

/// Average fidelity of pure loss tau against target |sqrt(eta) a> over the
/// (lambda/pi) e^{-lambda|a|^2} ensemble.
inline double loss_fidelity(double tau, double lambda, double eta) {
  const double c = std::pow(std::sqrt(eta) - std::sqrt(tau), 2);
  return lambda / (lambda + c);
}

/// Heterodyne measurement and re-preparation of |G beta>.
inline double heterodyne_fidelity(double G, double lambda, double eta) {
  const double g = std::sqrt(eta);
  return lambda / (lambda * (1.0 + G * G) + (G - g) * (G - g));
}

// Qudit operators.
inline CMatrix clock(int d) {
  CMatrix z = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) z(j, j) = std::polar(1.0, 2.0 * pi * j / d);
  return z;
}
inline CMatrix shift(int d) {
  CMatrix x = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  return x;
}
inline double g_value(int k, int d) { return ((d - k) * std::cos(2.0 * pi / d) + d + k) / d; }

/// g I - (Z (x) Z^dag + Z^dag (x) Z + X (x) X + X^dag (x) X^dag) / 2
inline CMatrix schmidt_witness(int k, int d) {
  const CMatrix z = clock(d), x = shift(d);
  return g_value(k, d) * CMatrix::Identity(d * d, d * d) -
         0.5 * (kron(z, z.adjoint()) + kron(z.adjoint(), z) + kron(x, x) + kron(x.adjoint(), x.adjoint()));
}

using Map = std::function<CMatrix(const CMatrix&)>;

inline Map depolarizing(double p, int d) {
  return [p, d](const CMatrix& r) -> CMatrix {
    return (1.0 - p) * r + p * r.trace() * CMatrix::Identity(d, d) / static_cast<double>(d);
  };
}
inline Map dephase_in(const CMatrix& basis) {
  return [basis](const CMatrix& r) -> CMatrix {
    CMatrix out = CMatrix::Zero(r.rows(), r.cols());
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      const CVector b = basis.col(j);
      out += (b.adjoint() * r * b)(0, 0) * (b * b.adjoint());
    }
    return out;
  };
}
inline CMatrix fourier(int d) {
  CMatrix f(d, d);
  for (int l = 0; l < d; ++l)
    for (int j = 0; j < d; ++j) f(j, l) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2.0 * pi * l * j / d);
  return f;
}

/// sum_ij E(|i><j|) (x) |i><j| / d
inline CMatrix normalized_choi(const Map& E, int d) {
  CMatrix J = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      CMatrix eij = CMatrix::Zero(d, d);
      eij(i, j) = 1.0;
      J += kron(E(eij), eij);
    }
  return J / static_cast<double>(d);
}

/// tr[W J] / tr[J] on the normalized Choi state.
inline double choi_expectation(const CMatrix& W, const CMatrix& J) { return (W * J).trace().real() / J.trace().real(); }

/// Direct two-basis sum with the 1/2 weight, normalized by P_s.
inline double schmidt_value(const Map& E, int d) {
  const CMatrix z = clock(d), x = shift(d), f = fourier(d);
  const double w = 2.0 * pi / d;
  Complex s = 0.0;
  double tr = 0.0;
  for (int j = 0; j < d; ++j) {
    CVector ej = CVector::Zero(d);
    ej(j) = 1.0;
    const CMatrix oz = E(ej * ej.adjoint());
    const CVector m = f.col((d - j) % d);
    const CMatrix ox = E(m * m.adjoint());
    const Complex ph = std::polar(1.0, -w * j);
    s += ph * (z * oz).trace() + std::conj(ph) * (z.adjoint() * oz).trace();
    s += ph * (x * ox).trace() + std::conj(ph) * (x.adjoint() * ox).trace();
    tr += oz.trace().real() + ox.trace().real();
  }
  return s.real() / tr;  // (1/2d) s / ((1/2d) tr)
}

inline CVector random_ket(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  CVector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(n01(rng), n01(rng));
  return v / v.norm();
}

inline CMatrix random_unitary(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = Complex(n01(rng), n01(rng));
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(d, d);
}

/// Random entanglement-breaking channel: measure in a random basis, prepare
/// random pure states. Kraus ops |s_i><m_i|.
inline std::vector<CMatrix> random_eb_kraus(std::mt19937_64& rng, int d) {
  const CMatrix m = random_unitary(rng, d);
  std::vector<CMatrix> ks;
  for (int i = 0; i < d; ++i) ks.push_back(random_ket(rng, d) * m.col(i).adjoint());
  return ks;
}

/// 2D midpoint rule over |a| <= R of f(a) d^2a / pi.
inline double plane_integral(const std::function<double(Complex)>& f, double R, int n) {
  const double h = 2.0 * R / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex a(-R + (i + 0.5) * h, -R + (j + 0.5) * h);
      if (std::abs(a) <= R) s += f(a);
    }
  return s * h * h / pi;
}

}  // namespace oracle
