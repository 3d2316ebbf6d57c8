#include "ebench/channels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <span>

#include "ebench/parallel.hpp"
#include "ebench/quadrature.hpp"
#include "ebench/simd/kernels.hpp"

namespace ebench::channels {
namespace {

std::span<const Complex> col_span(const CMatrix& m, Eigen::Index c) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}

// Per column c: k_c^dagger B k_c.
CVector quadratic_forms(const CMatrix& b, const CMatrix& kets) {
  const CMatrix bk = b * kets;
  CVector out(kets.cols());
  parallel::for_ranges(static_cast<std::size_t>(kets.cols()), [&](std::size_t lo, std::size_t hi) {
    for (auto c = static_cast<Eigen::Index>(lo); c < static_cast<Eigen::Index>(hi); ++c) {
      out(c) = simd::dotc(col_span(kets, c), col_span(bk, c));
    }
  });
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require_range(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

CMatrix effect_of(const Channel::Form& form, int in_dim) {
  return std::visit(
      [&](const auto& f) -> CMatrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, KrausList>) {
          CMatrix e = CMatrix::Zero(in_dim, in_dim);
          for (const auto& k : f.ops) e.noalias() += k.adjoint() * k;
          return e;
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          RVector d(f.weights.size());
          for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f.weights(i) * f.prep.col(i).squaredNorm();
          return f.povm * d.asDiagonal() * f.povm.adjoint();
        } else {
          // partial trace over the output, transposed
          const auto n = static_cast<Eigen::Index>(in_dim);
          const auto out_dim = f.choi.rows() / n;
          CMatrix e = CMatrix::Zero(n, n);
          for (Eigen::Index a = 0; a < out_dim; ++a) {
            e += f.choi.block(a * n, a * n, n, n);
          }
          return e.transpose();
        }
      },
      form);
}

CMatrix generalized_z(int d) {
  CMatrix z = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) z(j, j) = std::polar(1.0, 2.0 * pi * j / d);
  return z;
}

CMatrix generalized_x(int d) {
  CMatrix x = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  return x;
}

}  // namespace

Channel::Channel(std::string id, fock::Space input, fock::Space output, Form form, double scale)
    : id_(std::move(id)),
      input_(std::move(input)),
      output_(std::move(output)),
      form_(std::move(form)),
      scale_(scale) {
  require_range(scale_ > 0.0 && scale_ <= 1.0 + 1e-15, "channel scale must lie in (0, 1]");
  const auto din = input_.dim, dout = output_.dim;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, KrausList>) {
          require_range(!f.ops.empty(), "Kraus list must not be empty");
          for (const auto& k : f.ops) {
            require_range(k.rows() == dout && k.cols() == din, "Kraus operator has wrong shape");
          }
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          require_range(f.povm.rows() == din && f.prep.rows() == dout &&
                            f.povm.cols() == f.prep.cols() && f.weights.size() == f.povm.cols(),
                        "measure-and-prepare data has inconsistent shapes");
          require_range((f.weights.array() > 0.0).all(), "quadrature weights must be positive");
        } else {
          require_range(f.choi.rows() == static_cast<Eigen::Index>(din) * dout &&
                            f.choi.cols() == f.choi.rows(),
                        "Choi matrix has wrong shape");
        }
      },
      form_);
  effect_ = scale_ * effect_of(form_, din);
}

Channel Channel::scaled(double q, std::string id) const {
  require_range(q > 0.0 && q <= 1.0, "filter_scale: q must lie in (0, 1]");
  return Channel(std::move(id), input_, output_, form_, scale_ * q);
}

fock::Operator Channel::apply(const fock::Operator& rho) const {
  if (rho.matrix.rows() != input_.dim || rho.matrix.cols() != input_.dim) {
    throw InvalidArgument("apply: input dimension mismatch for channel " + id_);
  }
  if (fock::min_eigenvalue(rho.matrix) < -1e-8) {
    throw InvalidArgument("apply: input operator is not positive semidefinite");
  }
  fock::Space out = output_;
  if (!rho.layout.empty()) out.tag = rho.layout.front().tag;
  return fock::Operator{{out}, apply_matrix(rho.matrix)};
}

CMatrix Channel::apply_matrix(const CMatrix& x) const {
  const auto din = input_.dim, dout = output_.dim;
  CMatrix y = std::visit(
      [&](const auto& f) -> CMatrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, KrausList>) {
          CMatrix acc = CMatrix::Zero(dout, dout);
          for (const auto& k : f.ops) acc.noalias() += k * x * k.adjoint();
          return acc;
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          const CVector q = quadratic_forms(x, f.povm);
          CVector d = f.weights.template cast<Complex>().cwiseProduct(q);
          return f.prep * d.asDiagonal() * f.prep.adjoint();
        } else {
          CMatrix acc = CMatrix::Zero(dout, dout);
          for (Eigen::Index b = 0; b < dout; ++b) {
            for (Eigen::Index a = 0; a < dout; ++a) {
              acc(a, b) = f.choi.block(a * din, b * din, din, din).cwiseProduct(x).sum();
            }
          }
          return acc;
        }
      },
      form_);
  return scale_ * y;
}

CMatrix Channel::adjoint_apply(const CMatrix& observable) const {
  const auto din = input_.dim, dout = output_.dim;
  if (observable.rows() != dout || observable.cols() != dout) {
    throw InvalidArgument("adjoint_apply: observable dimension mismatch");
  }
  CMatrix y = std::visit(
      [&](const auto& f) -> CMatrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, KrausList>) {
          CMatrix acc = CMatrix::Zero(din, din);
          for (const auto& k : f.ops) acc.noalias() += k.adjoint() * observable * k;
          return acc;
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          const CVector a = quadratic_forms(observable, f.prep);
          CVector d = f.weights.template cast<Complex>().cwiseProduct(a);
          return f.povm * d.asDiagonal() * f.povm.adjoint();
        } else {
          // E^dagger(A)_{ji} = sum_ab A_ba J_{(a,i),(b,j)}
          CMatrix acc = CMatrix::Zero(din, din);
          for (Eigen::Index b = 0; b < dout; ++b) {
            for (Eigen::Index a = 0; a < dout; ++a) {
              acc += observable(b, a) * f.choi.block(a * din, b * din, din, din);
            }
          }
          return acc.transpose();
        }
      },
      form_);
  return scale_ * y;
}

RVector Channel::output_traces(const CMatrix& kets) const {
  if (kets.rows() != input_.dim) throw InvalidArgument("output_traces: dimension mismatch");
  return quadratic_forms(effect_, kets).real();
}

CVector Channel::observable_response(const CMatrix& observable, const CMatrix& kets) const {
  if (kets.rows() != input_.dim) throw InvalidArgument("observable_response: dimension mismatch");
  return quadratic_forms(adjoint_apply(observable), kets);
}

RVector Channel::target_response(const CMatrix& kets, const CMatrix& targets) const {
  const auto din = input_.dim, dout = output_.dim;
  if (kets.rows() != din || targets.rows() != dout || kets.cols() != targets.cols()) {
    throw InvalidArgument("target_response: dimension mismatch");
  }
  const auto cols = static_cast<std::size_t>(kets.cols());
  RVector out = RVector::Zero(kets.cols());
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, KrausList>) {
          for (const auto& k : f.ops) {
            const CMatrix kk = k * kets;
            parallel::for_ranges(cols, [&](std::size_t lo, std::size_t hi) {
              for (auto c = static_cast<Eigen::Index>(lo); c < static_cast<Eigen::Index>(hi); ++c) {
                out(c) += std::norm(simd::dotc(col_span(targets, c), col_span(kk, c)));
              }
            });
          }
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          const CMatrix o = f.povm.adjoint() * kets;
          const CMatrix t = f.prep.adjoint() * targets;
          const std::span<const double> w(f.weights.data(), static_cast<std::size_t>(f.weights.size()));
          parallel::for_ranges(cols, [&](std::size_t lo, std::size_t hi) {
            for (auto c = static_cast<Eigen::Index>(lo); c < static_cast<Eigen::Index>(hi); ++c) {
              out(c) = simd::weighted_norm2_product(w, col_span(o, c), col_span(t, c));
            }
          });
        } else {
          for (Eigen::Index c = 0; c < kets.cols(); ++c) {
            CVector v(static_cast<Eigen::Index>(dout) * din);
            for (Eigen::Index a = 0; a < dout; ++a) {
              v.segment(a * din, din) = targets(a, c) * kets.col(c).conjugate();
            }
            out(c) = (v.adjoint() * f.choi * v)(0, 0).real();
          }
        }
      },
      form_);
  return scale_ * out;
}

bool ChannelSpec::operator==(const ChannelSpec& o) const {
  if (kind != o.kind || tau != o.tau || gain != o.gain || radial_nodes != o.radial_nodes ||
      angular_nodes != o.angular_nodes || p != o.p || rank != o.rank || seed != o.seed ||
      allow_non_cp != o.allow_non_cp || q != o.q || inner != o.inner ||
      kraus.size() != o.kraus.size()) {
    return false;
  }
  for (std::size_t i = 0; i < kraus.size(); ++i) {
    if (kraus[i].rows() != o.kraus[i].rows() || kraus[i].cols() != o.kraus[i].cols()) return false;
    if (!(kraus[i].array() == o.kraus[i].array()).all()) return false;
  }
  return true;
}

ChannelSpec identity_spec() { return {}; }

ChannelSpec pure_loss_spec(double tau) {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::pure_loss;
  s.tau = tau;
  return s;
}

ChannelSpec heterodyne_spec(double gain, int radial_nodes, int angular_nodes) {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::heterodyne_mp;
  s.gain = gain;
  s.radial_nodes = radial_nodes;
  s.angular_nodes = angular_nodes;
  return s;
}

ChannelSpec depolarizing_spec(double p) {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::qudit_depolarizing;
  s.p = p;
  return s;
}

ChannelSpec z_measure_prepare_spec() {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::z_measure_prepare;
  return s;
}

ChannelSpec x_measure_prepare_spec() {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::x_measure_prepare;
  return s;
}

ChannelSpec rank_k_random_spec(int k, std::uint64_t seed) {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::rank_k_random;
  s.rank = k;
  s.seed = seed;
  return s;
}

ChannelSpec kraus_explicit_spec(std::vector<CMatrix> ops, bool allow_non_cp) {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::kraus_explicit;
  s.kraus = std::move(ops);
  s.allow_non_cp = allow_non_cp;
  return s;
}

ChannelSpec filter_scale_spec(double q, ChannelSpec inner) {
  ChannelSpec s;
  s.kind = ChannelSpec::Kind::filter_scale;
  s.q = q;
  s.inner.push_back(std::move(inner));
  return s;
}

const char* kind_name(ChannelSpec::Kind kind) {
  switch (kind) {
    case ChannelSpec::Kind::identity: return "identity";
    case ChannelSpec::Kind::pure_loss: return "pure_loss";
    case ChannelSpec::Kind::heterodyne_mp: return "heterodyne_mp";
    case ChannelSpec::Kind::qudit_depolarizing: return "qudit_depolarizing";
    case ChannelSpec::Kind::z_measure_prepare: return "z_measure_prepare";
    case ChannelSpec::Kind::x_measure_prepare: return "x_measure_prepare";
    case ChannelSpec::Kind::rank_k_random: return "rank_k_random";
    case ChannelSpec::Kind::kraus_explicit: return "kraus_explicit";
    case ChannelSpec::Kind::filter_scale: return "filter_scale";
  }
  return "unknown";
}

std::string describe(const ChannelSpec& s) {
  using K = ChannelSpec::Kind;
  switch (s.kind) {
    case K::identity: return "identity";
    case K::pure_loss: return "pure_loss(tau=" + fmt_double(s.tau) + ")";
    case K::heterodyne_mp: return "heterodyne_mp(gain=" + fmt_double(s.gain) + ")";
    case K::qudit_depolarizing: return "qudit_depolarizing(p=" + fmt_double(s.p) + ")";
    case K::z_measure_prepare: return "z_measure_prepare";
    case K::x_measure_prepare: return "x_measure_prepare";
    case K::rank_k_random:
      return "rank_k_random(k=" + std::to_string(s.rank) + ",seed=" + std::to_string(s.seed) + ")";
    case K::kraus_explicit: return "kraus_explicit(n=" + std::to_string(s.kraus.size()) + ")";
    case K::filter_scale:
      return "filter_scale(q=" + fmt_double(s.q) + "," +
             (s.inner.empty() ? std::string("?") : describe(s.inner.front())) + ")";
  }
  return "unknown";
}

HeterodyneGrid default_heterodyne_grid(int cutoff) {
  // closure exact on the truncated space needs 2*radial - 1 >= cutoff and
  // angular > cutoff; the margins absorb the smooth re-preparation factor.
  return {std::max(24, cutoff / 2 + 8), std::max(48, cutoff + 8)};
}

namespace {

Channel build_pure_loss(double tau, const fock::Space& space, std::string id) {
  require_range(tau >= 0.0 && tau <= 1.0, "pure_loss: tau must lie in [0, 1]");
  const int d = space.dim;
  KrausList k;
  for (int m = 0; m < d; ++m) {
    CMatrix op = CMatrix::Zero(d, d);
    for (int n = m; n < d; ++n) {
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
      const double amp = std::exp(0.5 * log_binom) * std::pow(tau, 0.5 * (n - m)) *
                         std::pow(1.0 - tau, 0.5 * m);
      op(n - m, n) = amp;
    }
    if (op.squaredNorm() > 0.0) k.ops.push_back(std::move(op));
  }
  return Channel(std::move(id), space, space, std::move(k));
}

Channel build_heterodyne(const ChannelSpec& s, const fock::Space& space, std::string id) {
  require_range(s.gain >= 0.0 && std::isfinite(s.gain), "heterodyne_mp: gain must be >= 0");
  require_range(s.radial_nodes >= 0 && s.angular_nodes >= 0, "heterodyne_mp: node counts must be >= 0");
  require_range(space.dim <= 401, "heterodyne_mp: cutoff above 400 is not supported");
  const auto def = default_heterodyne_grid(space.cutoff());
  const int nr = s.radial_nodes > 0 ? s.radial_nodes : def.radial;
  const int nt = s.angular_nodes > 0 ? s.angular_nodes : def.angular;
  const int d = space.dim;
  // int d^2b/pi = (1/2pi) int dtheta int dt with t = |b|^2; each POVM column is
  // sqrt(w_j e^{t_j} / N_theta) |b>, i.e. sqrt(w_j/N_theta) times the Bargmann vector.
  const quad::GaussRule rule = quad::gauss_laguerre(nr);
  const auto n_nodes = static_cast<Eigen::Index>(nr) * nt;
  MeasurePrepare mp;
  mp.weights = RVector::Ones(n_nodes);
  mp.povm.resize(d, n_nodes);
  mp.prep.resize(d, n_nodes);
  const double log_nt = std::log(static_cast<double>(nt));
  Eigen::Index col = 0;
  for (int j = 0; j < nr; ++j) {
    const double t = rule.nodes[j];
    const double r = std::sqrt(t);
    const double half_log_w = 0.5 * (rule.log_weights[j] - log_nt);
    for (int k = 0; k < nt; ++k, ++col) {
      const double theta = 2.0 * pi * k / nt;
      for (int n = 0; n < d; ++n) {
        const double mag = std::exp(half_log_w + n * std::log(r) - 0.5 * std::lgamma(n + 1.0));
        mp.povm(n, col) = std::polar(mag, n * theta);
      }
      const Complex beta = std::polar(r, theta);
      fock::StateVector prep = fock::coherent_ket(s.gain * beta, space);
      const double nrm = prep.amplitudes.norm();
      mp.prep.col(col) = prep.amplitudes / nrm;
    }
  }
  return Channel(std::move(id), space, space, std::move(mp));
}

Channel build_depolarizing(double p, const fock::Space& space, std::string id) {
  require_range(p >= 0.0 && p <= 1.0, "qudit_depolarizing: p must lie in [0, 1]");
  const int d = space.dim;
  const CMatrix z = generalized_z(d), x = generalized_x(d);
  KrausList k;
  const double d2 = static_cast<double>(d) * d;
  k.ops.push_back(std::sqrt(1.0 - p + p / d2) * CMatrix::Identity(d, d));
  if (p > 0.0) {
    CMatrix xa = CMatrix::Identity(d, d);
    for (int a = 0; a < d; ++a) {
      CMatrix zb = CMatrix::Identity(d, d);
      for (int b = 0; b < d; ++b) {
        if (a != 0 || b != 0) k.ops.push_back(std::sqrt(p / d2) * xa * zb);
        zb = zb * z;
      }
      xa = xa * x;
    }
  }
  return Channel(std::move(id), space, space, std::move(k));
}

Channel build_basis_mp(bool fourier, const fock::Space& space, std::string id) {
  const int d = space.dim;
  KrausList k;
  for (int l = 0; l < d; ++l) {
    CVector e = CVector::Zero(d);
    if (fourier) {
      for (int j = 0; j < d; ++j) e(j) = std::polar(1.0 / std::sqrt(double(d)), 2.0 * pi * l * j / d);
    } else {
      e(l) = 1.0;
    }
    k.ops.push_back(e * e.adjoint());
  }
  return Channel(std::move(id), space, space, std::move(k));
}

Channel build_rank_k(int rank, std::uint64_t seed, const fock::Space& space, std::string id) {
  const int d = space.dim;
  require_range(rank >= 1 && rank <= d, "rank_k_random: k must lie in [1, d]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int blocks = d;
  CMatrix g(static_cast<Eigen::Index>(d) * blocks, d);
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = Complex(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  const CMatrix v = qr.householderQ() * CMatrix::Identity(g.rows(), d);  // isometry

  KrausList k;
  CMatrix used = CMatrix::Zero(d, d);
  for (int b = 0; b < blocks; ++b) {
    CMatrix op = v.middleRows(static_cast<Eigen::Index>(b) * d, d);
    if (rank < d) {
      Eigen::JacobiSVD<CMatrix> svd(op, Eigen::ComputeFullU | Eigen::ComputeFullV);
      RVector s = svd.singularValues();
      for (int i = rank; i < d; ++i) s(i) = 0.0;
      op = svd.matrixU() * s.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
    }
    used.noalias() += op.adjoint() * op;
    k.ops.push_back(std::move(op));
  }
  // Rank-one measure-and-prepare tail absorbs I - sum K^dagger K >= 0.
  const CMatrix residual = CMatrix::Identity(d, d) - used;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (residual + residual.adjoint()));
  CVector sigma = CVector::Zero(d);
  sigma(0) = 1.0;
  for (int i = 0; i < d; ++i) {
    const double r = es.eigenvalues()(i);
    if (r > 1e-15) k.ops.push_back(std::sqrt(r) * sigma * es.eigenvectors().col(i).adjoint());
  }
  return Channel(std::move(id), space, space, std::move(k));
}

Channel build_explicit(const ChannelSpec& s, const fock::Space& space, std::string id) {
  require_range(!s.kraus.empty(), "kraus_explicit: empty operator list");
  for (const auto& op : s.kraus) {
    require_range(op.rows() == space.dim && op.cols() == space.dim,
                  "kraus_explicit: operator shape does not match the space dimension");
    require_range(op.allFinite(), "kraus_explicit: non-finite matrix entry");
  }
  Channel ch(std::move(id), space, space, KrausList{s.kraus});
  if (!s.allow_non_cp) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ch.effect(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > 1.0 + 1e-9) {
      throw InvalidArgument(
          "kraus_explicit: sum K^dagger K exceeds the identity (not a trace-non-increasing CP "
          "map); set allow_non_cp to override");
    }
  }
  return ch;
}

}  // namespace

Channel build_channel(const ChannelSpec& s, const fock::Space& space) {
  using K = ChannelSpec::Kind;
  const std::string id = describe(s);
  switch (s.kind) {
    case K::identity: return Channel(id, space, space, KrausList{{CMatrix::Identity(space.dim, space.dim)}});
    case K::pure_loss: return build_pure_loss(s.tau, space, id);
    case K::heterodyne_mp: return build_heterodyne(s, space, id);
    case K::qudit_depolarizing: return build_depolarizing(s.p, space, id);
    case K::z_measure_prepare: return build_basis_mp(false, space, id);
    case K::x_measure_prepare: return build_basis_mp(true, space, id);
    case K::rank_k_random: return build_rank_k(s.rank, s.seed, space, id);
    case K::kraus_explicit: return build_explicit(s, space, id);
    case K::filter_scale: {
      require_range(s.inner.size() == 1, "filter_scale: exactly one inner channel required");
      require_range(s.q > 0.0 && s.q <= 1.0, "filter_scale: q must lie in (0, 1]");
      return build_channel(s.inner.front(), space).scaled(s.q, id);
    }
  }
  throw InvalidArgument("unknown channel kind");
}

Completeness kraus_completeness(const Channel& channel) {
  const auto d = channel.input().dim;
  const CMatrix diff = channel.effect() - CMatrix::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  const double defect = es.eigenvalues().cwiseAbs().maxCoeff();
  return {defect <= 1e-9, defect};
}

namespace {

ChoiState choi_pure(const Channel& ch, const CVector& amp, const fock::Layout& layout) {
  const auto da = static_cast<Eigen::Index>(layout[0].dim);
  const auto db = static_cast<Eigen::Index>(layout[1].dim);
  const auto dout = static_cast<Eigen::Index>(ch.output().dim);
  // Psi(a, b) = amp(a * db + b)
  const CMatrix psi = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      amp.data(), da, db);
  auto row_major_vec = [](const CMatrix& m) {
    CVector v(m.size());
    for (Eigen::Index a = 0; a < m.rows(); ++a) v.segment(a * m.cols(), m.cols()) = m.row(a).transpose();
    return v;
  };

  CMatrix factor;
  const bool ok = std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, KrausList>) {
          factor.resize(dout * db, static_cast<Eigen::Index>(f.ops.size()));
          for (std::size_t i = 0; i < f.ops.size(); ++i) {
            factor.col(static_cast<Eigen::Index>(i)) = row_major_vec(f.ops[i] * psi);
          }
          return true;
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          const CMatrix g = f.povm.adjoint() * psi;  // row i = <m_i| Psi
          factor.resize(dout * db, f.povm.cols());
          parallel::for_ranges(static_cast<std::size_t>(f.povm.cols()), [&](std::size_t lo, std::size_t hi) {
            for (auto i = static_cast<Eigen::Index>(lo); i < static_cast<Eigen::Index>(hi); ++i) {
              const double sw = std::sqrt(f.weights(i));
              for (Eigen::Index a = 0; a < dout; ++a) {
                factor.col(i).segment(a * db, db) = (sw * f.prep(a, i)) * g.row(i).transpose();
              }
            }
          });
          return true;
        } else {
          return false;
        }
      },
      ch.form());

  fock::Space out_space = ch.output();
  out_space.tag = layout[0].tag;
  ChoiState cs;
  cs.source = ch.id();
  if (ok) {
    CMatrix j = CMatrix::Zero(dout * db, dout * db);
    j.selfadjointView<Eigen::Lower>().rankUpdate(factor, ch.scale());
    cs.J = fock::Operator{{out_space, layout[1]}, j.selfadjointView<Eigen::Lower>()};
  } else {
    const CMatrix rho = amp * amp.adjoint();
    CMatrix j(dout * db, dout * db);
    for (Eigen::Index b2 = 0; b2 < db; ++b2) {
      for (Eigen::Index b1 = 0; b1 < db; ++b1) {
        CMatrix block(da, da);
        for (Eigen::Index a2 = 0; a2 < da; ++a2) {
          for (Eigen::Index a1 = 0; a1 < da; ++a1) block(a1, a2) = rho(a1 * db + b1, a2 * db + b2);
        }
        const CMatrix e = ch.apply_matrix(block);
        for (Eigen::Index a2 = 0; a2 < dout; ++a2) {
          for (Eigen::Index a1 = 0; a1 < dout; ++a1) j(a1 * db + b1, a2 * db + b2) = e(a1, a2);
        }
      }
    }
    cs.J = fock::Operator{{out_space, layout[1]}, j};
  }
  cs.success_probability = cs.J.matrix.trace().real();
  return cs;
}

void check_reference(const Channel& ch, const fock::Layout& layout) {
  if (layout.size() != 2) throw InvalidArgument("choi_state: reference must live on two systems");
  if (layout[0].dim != ch.input().dim) {
    throw InvalidArgument("choi_state: channel input dimension does not match the reference system A");
  }
}

}  // namespace

ChoiState choi_state(const Channel& channel, const fock::StateVector& psi) {
  check_reference(channel, psi.layout);
  return choi_pure(channel, psi.amplitudes, psi.layout);
}

ChoiState choi_state(const Channel& channel, const fock::Operator& psi) {
  check_reference(channel, psi.layout);
  if (fock::min_eigenvalue(psi.matrix) < -1e-8) {
    throw InvalidArgument("choi_state: reference operator is not positive semidefinite");
  }
  if (auto pure = fock::as_pure(psi)) return choi_pure(channel, pure->amplitudes, psi.layout);

  const auto da = static_cast<Eigen::Index>(psi.layout[0].dim);
  const auto db = static_cast<Eigen::Index>(psi.layout[1].dim);
  const auto dout = static_cast<Eigen::Index>(channel.output().dim);
  CMatrix j(dout * db, dout * db);
  for (Eigen::Index b2 = 0; b2 < db; ++b2) {
    for (Eigen::Index b1 = 0; b1 < db; ++b1) {
      CMatrix block(da, da);
      for (Eigen::Index a2 = 0; a2 < da; ++a2) {
        for (Eigen::Index a1 = 0; a1 < da; ++a1) block(a1, a2) = psi.matrix(a1 * db + b1, a2 * db + b2);
      }
      const CMatrix e = channel.apply_matrix(block);
      for (Eigen::Index a2 = 0; a2 < dout; ++a2) {
        for (Eigen::Index a1 = 0; a1 < dout; ++a1) j(a1 * db + b1, a2 * db + b2) = e(a1, a2);
      }
    }
  }
  fock::Space out_space = channel.output();
  out_space.tag = psi.layout[0].tag;
  ChoiState cs;
  cs.J = fock::Operator{{out_space, psi.layout[1]}, j};
  cs.success_probability = j.trace().real();
  cs.source = channel.id();
  return cs;
}

CMatrix choi_matrix(const Channel& channel) {
  fock::Space a = channel.input();
  a.tag = "in";
  fock::Space ref = channel.input();
  ref.tag = "ref";
  const auto d = channel.input().dim;
  fock::StateVector unnormalized = fock::maximally_entangled_ket(a, ref);
  unnormalized.amplitudes *= std::sqrt(static_cast<double>(d));
  return choi_pure(channel, unnormalized.amplitudes, unnormalized.layout).J.matrix;
}

}  // namespace ebench::channels
