#include "ebench/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "ebench/simd/kernels.hpp"

namespace ebench::fock {
namespace {

struct Strides {
  std::vector<int> dims;
  std::vector<int> strides;
};

Strides strides_of(const Layout& layout) {
  Strides s;
  s.dims.reserve(layout.size());
  for (const auto& sp : layout) s.dims.push_back(sp.dim);
  s.strides.assign(layout.size(), 1);
  for (int i = static_cast<int>(layout.size()) - 2; i >= 0; --i) {
    s.strides[i] = s.strides[i + 1] * s.dims[i + 1];
  }
  return s;
}

void check_disjoint(const Layout& x, const Layout& y) {
  for (const auto& a : x) {
    for (const auto& b : y) {
      if (a.tag == b.tag) throw InvalidArgument("tensor: clashing space tag '" + a.tag + "'");
    }
  }
}

Layout concat(const Layout& x, const Layout& y) {
  Layout out = x;
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

void check_layout(const Operator& op) {
  if (op.matrix.rows() != op.matrix.cols() || op.matrix.rows() != total_dim(op.layout)) {
    throw InvalidArgument("operator matrix does not match its layout dimension");
  }
}

}  // namespace

Space fock_space(std::string tag, int cutoff) {
  if (cutoff < 1) throw InvalidArgument("fock_space: cutoff must be >= 1");
  return Space{std::move(tag), cutoff + 1, true};
}

Space qudit_space(std::string tag, int d) {
  if (d < 2) throw InvalidArgument("qudit_space: d must be >= 2");
  return Space{std::move(tag), d, false};
}

int total_dim(const Layout& layout) {
  int d = 1;
  for (const auto& s : layout) d *= s.dim;
  return d;
}

int recommended_cutoff(double max_abs2) {
  if (!(max_abs2 >= 0.0) || !std::isfinite(max_abs2)) {
    throw InvalidArgument("recommended_cutoff: amplitude must be finite and >= 0");
  }
  const double rule = std::ceil(max_abs2 + 6.0 * std::sqrt(max_abs2));
  int c = std::max(20, static_cast<int>(rule));
  // the 6 sigma rule alone leaves tails near 1e-8 for large amplitudes
  while (coherent_tail(max_abs2, c) >= 1e-10) ++c;
  return c;
}

double coherent_tail(double abs2, int cutoff) {
  if (abs2 <= 0.0) return 0.0;
  const double log_x = std::log(abs2);
  double sum = 0.0;
  for (int n = cutoff + 1;; ++n) {
    const double term = std::exp(-abs2 + n * log_x - std::lgamma(n + 1.0));
    sum += term;
    if (n > abs2 && term <= 1e-18 * sum) break;
    if (n > abs2 && sum == 0.0 && term == 0.0) break;
    if (n > cutoff + 100000) break;
  }
  return std::min(sum, 1.0);
}

double Operator::hermiticity_defect() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

StateVector coherent_ket(Complex alpha, const Space& space) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw InvalidArgument("coherent_ket: alpha must be finite");
  }
  StateVector out;
  out.layout = {space};
  out.amplitudes = CVector::Zero(space.dim);
  const double r = std::abs(alpha);
  if (r == 0.0) {
    out.amplitudes(0) = 1.0;
    return out;
  }
  const double x = r * r;
  if (x < 500.0) {
    Complex c = std::exp(-0.5 * x);
    out.amplitudes(0) = c;
    for (int n = 1; n < space.dim; ++n) {
      c *= alpha / std::sqrt(static_cast<double>(n));
      out.amplitudes(n) = c;
    }
  } else {
    const double theta = std::arg(alpha);
    const double log_r = std::log(r);
    for (int n = 0; n < space.dim; ++n) {
      const double mag = std::exp(-0.5 * x + n * log_r - 0.5 * std::lgamma(n + 1.0));
      out.amplitudes(n) = std::polar(mag, n * theta);
    }
  }
  out.truncation_defect = coherent_tail(x, space.cutoff());
  out.truncation_warning = out.truncation_defect > 1e-8;
  return out;
}

CVector bargmann_vector(Complex alpha, int dim) {
  CVector v(dim);
  Complex c = 1.0;
  v(0) = c;
  for (int n = 1; n < dim; ++n) {
    c *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = c;
  }
  return v;
}

StateVector two_mode_squeezed_ket(double xi, const Space& a, const Space& b) {
  if (!(xi > 0.0 && xi < 1.0)) {
    throw InvalidArgument("two_mode_squeezed_ket: xi must lie in (0, 1)");
  }
  if (a.tag == b.tag) throw InvalidArgument("two_mode_squeezed_ket: clashing space tags");
  StateVector out;
  out.layout = {a, b};
  out.amplitudes = CVector::Zero(static_cast<Eigen::Index>(a.dim) * b.dim);
  const int levels = std::min(a.dim, b.dim);
  const double norm = std::sqrt(1.0 - xi * xi);
  double p = 1.0;
  for (int n = 0; n < levels; ++n) {
    out.amplitudes(static_cast<Eigen::Index>(n) * b.dim + n) = norm * p;
    p *= xi;
  }
  out.truncation_defect = std::pow(xi, 2.0 * levels);
  out.truncation_warning = out.truncation_defect > 1e-8;
  return out;
}

StateVector basis_ket(const Space& space, int n) {
  if (n < 0 || n >= space.dim) throw InvalidArgument("basis_ket: level out of range");
  StateVector out;
  out.layout = {space};
  out.amplitudes = CVector::Zero(space.dim);
  out.amplitudes(n) = 1.0;
  return out;
}

StateVector maximally_entangled_ket(const Space& a, const Space& b) {
  if (a.tag == b.tag) throw InvalidArgument("maximally_entangled_ket: clashing space tags");
  StateVector out;
  out.layout = {a, b};
  out.amplitudes = CVector::Zero(static_cast<Eigen::Index>(a.dim) * b.dim);
  const int d = std::min(a.dim, b.dim);
  for (int j = 0; j < d; ++j) {
    out.amplitudes(static_cast<Eigen::Index>(j) * b.dim + j) = 1.0 / std::sqrt(double(d));
  }
  return out;
}

LadderPair mode_operators(const Space& space) {
  CMatrix a = CMatrix::Zero(space.dim, space.dim);
  for (int n = 1; n < space.dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  LadderPair out;
  out.annihilation = {Operator{{space}, a}, ModeKind::annihilation};
  out.creation = {Operator{{space}, a.adjoint()}, ModeKind::creation};
  return out;
}

Operator identity(const Layout& layout) {
  const int d = total_dim(layout);
  return Operator{layout, CMatrix::Identity(d, d)};
}

StateVector tensor(const StateVector& x, const StateVector& y) {
  check_disjoint(x.layout, y.layout);
  StateVector out;
  out.layout = concat(x.layout, y.layout);
  const auto nx = x.amplitudes.size();
  const auto ny = y.amplitudes.size();
  out.amplitudes.resize(nx * ny);
  for (Eigen::Index i = 0; i < nx; ++i) {
    out.amplitudes.segment(i * ny, ny) = x.amplitudes(i) * y.amplitudes;
  }
  // 1 - (1-dx)(1-dy)
  out.truncation_defect =
      x.truncation_defect + y.truncation_defect - x.truncation_defect * y.truncation_defect;
  out.truncation_warning = x.truncation_warning || y.truncation_warning;
  return out;
}

Operator tensor(const Operator& x, const Operator& y) {
  check_disjoint(x.layout, y.layout);
  check_layout(x);
  check_layout(y);
  const auto nx = x.matrix.rows();
  const auto ny = y.matrix.rows();
  Operator out{concat(x.layout, y.layout), CMatrix(nx * ny, nx * ny)};
  for (Eigen::Index j = 0; j < nx; ++j) {
    for (Eigen::Index i = 0; i < nx; ++i) {
      out.matrix.block(i * ny, j * ny, ny, ny) = x.matrix(i, j) * y.matrix;
    }
  }
  return out;
}

ModeOperator tensor(const ModeOperator& x, const ModeOperator& y) {
  return {tensor(x.op, y.op), ModeKind::general};
}

Operator projector(const StateVector& psi) {
  return Operator{psi.layout, psi.amplitudes * psi.amplitudes.adjoint()};
}

std::size_t find_tag(const Layout& layout, std::string_view tag) {
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].tag == tag) return i;
  }
  throw InvalidArgument("unknown space tag '" + std::string(tag) + "'");
}

Operator partial_trace(const Operator& rho, std::string_view keep) {
  return partial_trace(rho, std::vector<std::string>{std::string(keep)});
}

Operator partial_trace(const Operator& rho, const std::vector<std::string>& keep) {
  check_layout(rho);
  const auto st = strides_of(rho.layout);
  std::vector<bool> kept(rho.layout.size(), false);
  for (const auto& tag : keep) kept[find_tag(rho.layout, tag)] = true;

  Layout kept_layout;
  std::vector<std::size_t> kept_idx, traced_idx;
  for (std::size_t i = 0; i < rho.layout.size(); ++i) {
    if (kept[i]) {
      kept_layout.push_back(rho.layout[i]);
      kept_idx.push_back(i);
    } else {
      traced_idx.push_back(i);
    }
  }
  auto offsets = [&](const std::vector<std::size_t>& which) {
    int count = 1;
    for (auto i : which) count *= st.dims[i];
    std::vector<int> off(count, 0);
    for (int flat = 0; flat < count; ++flat) {
      int rem = flat, o = 0;
      for (int k = static_cast<int>(which.size()) - 1; k >= 0; --k) {
        const auto i = which[k];
        o += (rem % st.dims[i]) * st.strides[i];
        rem /= st.dims[i];
      }
      off[flat] = o;
    }
    return off;
  };
  const auto ko = offsets(kept_idx);
  const auto to = offsets(traced_idx);
  const auto dk = static_cast<Eigen::Index>(ko.size());
  Operator out{kept_layout, CMatrix::Zero(dk, dk)};
  for (Eigen::Index c = 0; c < dk; ++c) {
    for (Eigen::Index r = 0; r < dk; ++r) {
      Complex acc = 0.0;
      for (int t : to) acc += rho.matrix(ko[r] + t, ko[c] + t);
      out.matrix(r, c) = acc;
    }
  }
  return out;
}

Operator partial_transpose(const Operator& rho, std::string_view tag) {
  check_layout(rho);
  const auto st = strides_of(rho.layout);
  const auto k = find_tag(rho.layout, tag);
  const int stride = st.strides[k];
  const int dim = st.dims[k];
  const auto n = rho.matrix.rows();
  Operator out{rho.layout, CMatrix(n, n)};
  for (Eigen::Index c = 0; c < n; ++c) {
    const int ck = static_cast<int>((c / stride) % dim);
    for (Eigen::Index r = 0; r < n; ++r) {
      const int rk = static_cast<int>((r / stride) % dim);
      // swap the tagged digit between row and column
      const Eigen::Index r2 = r + static_cast<Eigen::Index>(ck - rk) * stride;
      const Eigen::Index c2 = c + static_cast<Eigen::Index>(rk - ck) * stride;
      out.matrix(r, c) = rho.matrix(r2, c2);
    }
  }
  return out;
}

Complex expectation(const Operator& op, const Operator& rho) {
  if (op.matrix.rows() != rho.matrix.rows() || op.matrix.cols() != rho.matrix.cols()) {
    throw InvalidArgument("expectation: dimension mismatch");
  }
  // tr(op rho) = sum_ij op_ij rho_ji
  const CMatrix rho_t = rho.matrix.transpose();
  return simd::dotu(std::span<const Complex>(op.matrix.data(), op.matrix.size()),
                    std::span<const Complex>(rho_t.data(), rho_t.size()));
}

Complex expectation(const Operator& op, const StateVector& psi) {
  if (op.matrix.rows() != psi.amplitudes.size()) {
    throw InvalidArgument("expectation: dimension mismatch");
  }
  const CVector opsi = op.matrix * psi.amplitudes;
  return simd::dotc(std::span<const Complex>(psi.amplitudes.data(), psi.amplitudes.size()),
                    std::span<const Complex>(opsi.data(), opsi.size()));
}

double min_eigenvalue(const CMatrix& hermitian) {
  const CMatrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::optional<StateVector> as_pure(const Operator& rho, double tol) {
  const double tr = rho.matrix.trace().real();
  if (!(tr > 0.0)) return std::nullopt;
  const double purity = rho.matrix.squaredNorm();
  if (std::abs(purity - tr * tr) > tol * tr * tr) return std::nullopt;
  Eigen::Index j = 0;
  rho.matrix.diagonal().real().maxCoeff(&j);
  const double djj = rho.matrix(j, j).real();
  if (!(djj > 0.0)) return std::nullopt;
  StateVector out;
  out.layout = rho.layout;
  out.amplitudes = rho.matrix.col(j) / std::sqrt(djj);
  return out;
}

CMatrix factorize(const Operator& rho, double rel_cutoff) {
  if (auto pure = as_pure(rho)) return pure->amplitudes;
  const CMatrix h = 0.5 * (rho.matrix + rho.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const auto& ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
    if (ev(i) > rel_cutoff * top && ev(i) > 0.0) keep.push_back(i);
  }
  CMatrix f(h.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    f.col(static_cast<Eigen::Index>(c)) = std::sqrt(ev(keep[c])) * es.eigenvectors().col(keep[c]);
  }
  return f;
}

}  // namespace ebench::fock
