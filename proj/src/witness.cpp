#include "ebench/witness.hpp"

#include <cmath>
#include <map>
#include <span>

#include "ebench/parallel.hpp"

namespace ebench::witness {
namespace {

CMatrix kron(const CMatrix& x, const CMatrix& y) {
  CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

// Psi(a, b) = amp(a * db + b)
CMatrix reshape(const CVector& amp, Eigen::Index da, Eigen::Index db) {
  CMatrix m(da, db);
  for (Eigen::Index a = 0; a < da; ++a) m.row(a) = amp.segment(a * db, db).transpose();
  return m;
}

void check_bipartite(const fock::Layout& layout, const char* what) {
  if (layout.size() != 2) throw InvalidArgument(std::string(what) + ": state must live on two systems");
}

bool is_hermitian(const CMatrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

using Int = __int128;

Int checked_mul(Int a, Int b) {
  constexpr Int limit = Int(1) << 100;
  if (a != 0 && (b > limit / a || b < -limit / a)) throw InvalidArgument("antinormal_reorder: overflow");
  return a * b;
}

Int binomial(int n, int k) {
  Int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;  // exact at every step
  return r;
}

}  // namespace

std::vector<AntinormalMonomial> antinormal_reorder(int n, int m) {
  if (n < 0 || m < 0) throw InvalidArgument("antinormal_reorder: powers must be >= 0");
  if (n + m > 32) throw InvalidArgument("antinormal_reorder: n + m above 32 is not supported");
  std::vector<AntinormalMonomial> out;
  Int fact = 1;
  for (int k = 0; k <= std::min(n, m); ++k) {
    if (k > 0) fact = checked_mul(fact, k);
    Int c = checked_mul(checked_mul(fact, binomial(m, k)), binomial(n, k));
    if (k % 2 == 1) c = -c;
    out.push_back({static_cast<double>(c), n - k, m - k});
  }
  return out;
}

Symbol witness_symbol(const WitnessSpec& w, int a_dim) {
  return std::visit(
      [a_dim](const auto& x) -> Symbol {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PolynomialWitness>) {
          struct Reordered {
            CMatrix A;
            Complex coeff;
            std::vector<AntinormalMonomial> mono;
          };
          std::vector<Reordered> terms;
          for (const auto& t : x.terms) {
            if (t.A.rows() != a_dim || t.A.cols() != a_dim) {
              throw InvalidArgument("witness_symbol: A operator dimension mismatch");
            }
            terms.push_back({t.A, t.coeff, antinormal_reorder(t.n, t.m)});
          }
          return [terms, a_dim](Complex alpha) {
            CMatrix s = CMatrix::Zero(a_dim, a_dim);
            for (const auto& t : terms) {
              Complex c = 0.0;
              for (const auto& mo : t.mono) c += mo.coeff * std::pow(std::conj(alpha), mo.n) * std::pow(alpha, mo.m);
              s += (t.coeff * c) * t.A;
            }
            return s;
          };
        } else if constexpr (std::is_same_v<T, CoherentIntegralWitness>) {
          const fock::Space a = fock::fock_space("A", a_dim - 1);
          return [x, a, a_dim](Complex alpha) {
            const CVector f = fock::coherent_ket(x.family(alpha), a).amplitudes;
            return CMatrix(x.constant * CMatrix::Identity(a_dim, a_dim) - x.kernel(alpha) * f * f.adjoint());
          };
        } else {
          throw InvalidArgument("witness_symbol: qudit-pair witnesses have no coherent-state symbol");
        }
      },
      w);
}

double InputEnsemble::normalization() const {
  double s = 0.0;
  for (const auto& m : members) s += m.weight;
  return s / groups;
}

InputEnsemble ensemble_from_state(const fock::Operator& psi, const quad::QuadratureGrid& grid) {
  check_bipartite(psi.layout, "ensemble_from_state");
  const fock::Space& a = psi.layout[0];
  const fock::Space& b = psi.layout[1];
  if (!b.is_fock) throw InvalidArgument("ensemble_from_state: system B must be a Fock space");
  if (fock::min_eigenvalue(psi.matrix) < -1e-8) {
    throw InvalidArgument("ensemble_from_state: reference state is not positive semidefinite");
  }
  const CMatrix f = fock::factorize(psi);
  std::vector<CMatrix> blocks;  // one dA x dB reshaped factor column each
  for (Eigen::Index c = 0; c < f.cols(); ++c) blocks.push_back(reshape(f.col(c), a.dim, b.dim));

  const std::size_t n = grid.size();
  std::vector<Member> all(n);
  std::vector<double> dropped(n, 0.0);
  std::vector<char> keep(n, 0);
  parallel::for_ranges(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Complex alpha = grid.nodes[i];
      // (I (x) <alpha*|) psi uses <alpha*|n> = coherent(alpha)_n
      const CVector c = fock::coherent_ket(alpha, b).amplitudes;
      CMatrix fac(a.dim, static_cast<Eigen::Index>(blocks.size()));
      for (std::size_t k = 0; k < blocks.size(); ++k) fac.col(static_cast<Eigen::Index>(k)) = blocks[k] * c;
      const double p = fac.squaredNorm();
      const double w = std::exp(grid.log_measure[i]) * p;
      if (!(p >= 1e-14)) {
        dropped[i] = std::isfinite(w) ? w : 0.0;
        continue;
      }
      Member& m = all[i];
      m.weight = w;
      m.factor = fac / std::sqrt(p);
      m.alpha = alpha;
      m.has_alpha = true;
      keep[i] = 1;
    }
  });

  InputEnsemble ens;
  ens.space = a;
  ens.source = "reference state";
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) ens.members.push_back(std::move(all[i]));
    ens.dropped_weight += dropped[i];
  }
  ens.quadrature_error = std::abs(ens.normalization() + ens.dropped_weight - psi.matrix.trace().real());
  return ens;
}

InputEnsemble ensemble_from_state(const fock::StateVector& psi, const quad::QuadratureGrid& grid) {
  return ensemble_from_state(fock::projector(psi), grid);
}

InputEnsemble pair_ensemble(const QuditPairWitness& w, const fock::Operator& psi,
                            const std::vector<CMatrix>& bases, const std::vector<RVector>& evals) {
  check_bipartite(psi.layout, "pair_ensemble");
  if (w.pairs.empty()) throw InvalidArgument("pair_ensemble: witness has no pairs");
  if (bases.size() != w.pairs.size() || evals.size() != w.pairs.size()) {
    throw InvalidArgument("pair_ensemble: one eigenbasis per pair required");
  }
  const fock::Space& a = psi.layout[0];
  const fock::Space& b = psi.layout[1];
  if (fock::min_eigenvalue(psi.matrix) < -1e-8) {
    throw InvalidArgument("pair_ensemble: reference state is not positive semidefinite");
  }
  const CMatrix f = fock::factorize(psi);
  std::vector<CMatrix> blocks;
  for (Eigen::Index c = 0; c < f.cols(); ++c) blocks.push_back(reshape(f.col(c), a.dim, b.dim));

  InputEnsemble ens;
  ens.space = a;
  ens.source = "pair decomposition";
  ens.groups = static_cast<int>(w.pairs.size());
  for (std::size_t l = 0; l < w.pairs.size(); ++l) {
    const auto& pr = w.pairs[l];
    const std::string tag = "pair_ensemble: pair " + std::to_string(l);
    if (pr.w.rows() != a.dim || pr.w.cols() != a.dim || pr.h.rows() != b.dim || pr.h.cols() != b.dim) {
      throw InvalidArgument(tag + " has wrong dimensions");
    }
    if (!is_hermitian(pr.h, 1e-10)) throw InvalidArgument(tag + ": h is not Hermitian");
    const CMatrix& u = bases[l];
    if (u.rows() != b.dim || u.cols() != b.dim || evals[l].size() != b.dim) {
      throw InvalidArgument(tag + ": eigenbasis has wrong dimensions");
    }
    if ((u.adjoint() * u - CMatrix::Identity(b.dim, b.dim)).cwiseAbs().maxCoeff() > 1e-10 ||
        (u * evals[l].cast<Complex>().asDiagonal() * u.adjoint() - pr.h).cwiseAbs().maxCoeff() > 1e-10) {
      throw InvalidArgument(tag + ": supplied eigenbasis does not diagonalize h");
    }
    for (int j = 0; j < b.dim; ++j) {
      const CVector e = u.col(j).conjugate();  // (I (x) <e_j|)
      CMatrix fac(a.dim, static_cast<Eigen::Index>(blocks.size()));
      for (std::size_t k = 0; k < blocks.size(); ++k) fac.col(static_cast<Eigen::Index>(k)) = blocks[k] * e;
      const double p = fac.squaredNorm();
      if (p < 1e-14) {
        ens.dropped_weight += p / ens.groups;
        continue;
      }
      Member m;
      m.weight = p;
      m.factor = fac / std::sqrt(p);
      m.j = j;
      m.l = static_cast<int>(l);
      m.h = evals[l](j);
      ens.members.push_back(std::move(m));
    }
  }
  return ens;
}

InputEnsemble pair_ensemble(const QuditPairWitness& w, const fock::Operator& psi) {
  std::vector<CMatrix> bases;
  std::vector<RVector> evals;
  for (std::size_t l = 0; l < w.pairs.size(); ++l) {
    const CMatrix& h = w.pairs[l].h;
    if (!is_hermitian(h, 1e-10)) {
      throw InvalidArgument("pair_ensemble: h of pair " + std::to_string(l) + " is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    bases.push_back(es.eigenvectors());
    evals.push_back(es.eigenvalues());
  }
  return pair_ensemble(w, psi, bases, evals);
}

EBValue eb_value(const WitnessSpec& w, const InputEnsemble& ens, const channels::Channel& channel) {
  if (ens.members.empty()) throw InvalidArgument("eb_value: empty ensemble");
  const auto din = channel.input().dim;
  // Stack all member factors column-wise.
  std::vector<Eigen::Index> offset(ens.members.size() + 1, 0);
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    const auto& f = ens.members[i].factor;
    if (f.rows() != din) throw InvalidArgument("eb_value: ensemble and channel dimensions differ");
    offset[i + 1] = offset[i] + f.cols();
  }
  CMatrix kets(din, offset.back());
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    kets.middleCols(offset[i], ens.members[i].factor.cols()) = ens.members[i].factor;
  }
  auto member_sum = [&](const auto& v, std::size_t i) {
    typename std::decay_t<decltype(v)>::Scalar s = 0.0;
    for (Eigen::Index c = offset[i]; c < offset[i + 1]; ++c) s += v(c);
    return s;
  };

  const RVector traces = channel.output_traces(kets);
  double ps = 0.0;
  for (std::size_t i = 0; i < ens.members.size(); ++i) ps += ens.members[i].weight * member_sum(traces, i);
  ps /= ens.groups;
  if (!(ps >= 1e-12)) throw NumericalFailure("eb_value: success probability below 1e-12");

  EBValue out;
  out.P_s = ps;
  out.contributions.assign(ens.members.size(), Complex(0.0));
  auto require_alpha = [&] {
    for (const auto& m : ens.members) {
      if (!m.has_alpha) throw InvalidArgument("eb_value: coherent symbols need an alpha-labelled ensemble");
    }
  };

  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PolynomialWitness>) {
          require_alpha();
          for (const auto& t : x.terms) {
            const auto mono = antinormal_reorder(t.n, t.m);
            const CVector resp = channel.observable_response(t.A, kets);
            for (std::size_t i = 0; i < ens.members.size(); ++i) {
              const Complex al = ens.members[i].alpha;
              Complex s = 0.0;
              for (const auto& mo : mono) s += mo.coeff * std::pow(std::conj(al), mo.n) * std::pow(al, mo.m);
              out.contributions[i] += ens.members[i].weight * t.coeff * s * member_sum(resp, i);
            }
          }
        } else if constexpr (std::is_same_v<T, CoherentIntegralWitness>) {
          require_alpha();
          CMatrix targets(channel.output().dim, kets.cols());
          std::vector<double> kern(ens.members.size());
          for (std::size_t i = 0; i < ens.members.size(); ++i) {
            const Complex al = ens.members[i].alpha;
            kern[i] = x.kernel(al);
            const CVector t = fock::coherent_ket(x.family(al), channel.output()).amplitudes;
            for (Eigen::Index c = offset[i]; c < offset[i + 1]; ++c) targets.col(c) = t;
          }
          const RVector resp = channel.target_response(kets, targets);
          for (std::size_t i = 0; i < ens.members.size(); ++i) {
            out.contributions[i] =
                ens.members[i].weight * (x.constant * member_sum(traces, i) - kern[i] * member_sum(resp, i));
          }
        } else {
          std::map<int, CVector> resp;
          for (const auto& m : ens.members) {
            if (m.l < 0 || m.l >= static_cast<int>(x.pairs.size())) {
              throw InvalidArgument("eb_value: ensemble member references an unknown pair");
            }
            if (!resp.count(m.l)) resp[m.l] = channel.observable_response(x.pairs[m.l].w, kets);
          }
          for (std::size_t i = 0; i < ens.members.size(); ++i) {
            const auto& m = ens.members[i];
            out.contributions[i] = m.weight * m.h * member_sum(resp[m.l], i);
          }
        }
      },
      w);

  Complex total = 0.0;
  for (const auto& c : out.contributions) total += c;  // member order
  out.value = total.real() / ps;
  out.imag = total.imag() / ps;
  out.error_estimate = ens.error_estimate();
  return out;
}

double nonlinear_eb_value(const NonlinearCondition& cond, const InputEnsemble& ens,
                          const channels::Channel& channel) {
  if (!cond.combiner) throw InvalidArgument("nonlinear_eb_value: missing combiner");
  std::vector<Complex> x;
  for (const auto& s : cond.symbols) {
    const EBValue v = eb_value(s, ens, channel);
    x.emplace_back(v.value, v.imag);
  }
  const double f = cond.combiner(x);
  if (!std::isfinite(f)) throw NumericalFailure("nonlinear_eb_value: combiner returned a non-finite value");
  return f;
}

namespace {

quad::QuadratureGrid exact_grid(const CoherentIntegralWitness& x, const fock::Space& a, const fock::Space& b) {
  const int c = a.cutoff() + b.cutoff();
  return quad::gaussian_grid(x.decay, c / 2 + 2, c + 2);
}

CMatrix assemble_covariant(const CoherentIntegralWitness& x, const fock::Space& a, const fock::Space& b,
                           const quad::QuadratureGrid& g) {
  const int da = a.dim, db = b.dim;
  const Complex kappa = *x.linear_family;
  // index sets with fixed n_A - n_B
  std::map<int, std::vector<std::pair<int, int>>> sectors;
  for (int na = 0; na < da; ++na) {
    for (int nb = 0; nb < db; ++nb) sectors[na - nb].push_back({na, nb});
  }
  CMatrix w = x.constant * CMatrix::Identity(da * db, da * db);
  const double log_nt = std::log(static_cast<double>(g.angular_count));
  for (int j = 0; j < g.radial_count; ++j) {
    const double r = g.radial_nodes[j];
    const auto base = static_cast<std::size_t>(j) * g.angular_count;
    double s = std::exp(g.log_measure[base] + log_nt) * x.kernel(Complex(r, 0.0));
    if (s == 0.0) continue;
    if (!std::isfinite(s)) throw NumericalFailure("assemble_witness: non-finite quadrature weight");
    const CVector fa = fock::coherent_ket(kappa * r, a).amplitudes;
    const CVector fb = fock::coherent_ket(Complex(r, 0.0), b).amplitudes;
    for (const auto& [delta, idx] : sectors) {
      const auto m = static_cast<Eigen::Index>(idx.size());
      CVector z(m);
      for (Eigen::Index i = 0; i < m; ++i) z(i) = fa(idx[i].first) * fb(idx[i].second);
      for (Eigen::Index p = 0; p < m; ++p) {
        const int row = idx[p].first * db + idx[p].second;
        for (Eigen::Index q = 0; q < m; ++q) {
          w(row, idx[q].first * db + idx[q].second) -= s * z(p) * std::conj(z(q));
        }
      }
    }
  }
  return w;
}

CMatrix assemble_dense(const CoherentIntegralWitness& x, const fock::Space& a, const fock::Space& b,
                       const quad::QuadratureGrid& g) {
  const int da = a.dim, db = b.dim;
  const auto n = static_cast<Eigen::Index>(g.size());
  CMatrix pos(da * db, n), neg(da * db, n);
  Eigen::Index np = 0, nn = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex beta = g.nodes[i];
    const double k = x.kernel(beta);
    if (k == 0.0) continue;
    const double s = std::sqrt(std::exp(g.log_measure[i]) * std::abs(k));
    if (!std::isfinite(s)) throw NumericalFailure("assemble_witness: non-finite quadrature weight");
    const CVector fa = fock::coherent_ket(x.family(beta), a).amplitudes;
    const CVector fb = fock::coherent_ket(std::conj(beta), b).amplitudes;
    CVector y(da * db);
    for (int p = 0; p < da; ++p) y.segment(p * db, db) = (s * fa(p)) * fb;
    if (k > 0) pos.col(np++) = y;
    else neg.col(nn++) = y;
  }
  CMatrix w = x.constant * CMatrix::Identity(da * db, da * db);
  w.noalias() -= pos.leftCols(np) * pos.leftCols(np).adjoint();
  w.noalias() += neg.leftCols(nn) * neg.leftCols(nn).adjoint();
  return w;
}

}  // namespace

fock::Operator assemble_witness(const WitnessSpec& w, const fock::Layout& layout, const quad::QuadratureGrid* grid) {
  if (layout.size() != 2) throw InvalidArgument("assemble_witness: layout must have two systems");
  const fock::Space& a = layout[0];
  const fock::Space& b = layout[1];
  CMatrix m = std::visit(
      [&](const auto& x) -> CMatrix {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PolynomialWitness>) {
          if (!b.is_fock) throw InvalidArgument("assemble_witness: mode powers need a Fock space B");
          const auto ladder = fock::mode_operators(b);
          const CMatrix& lower = ladder.annihilation.op.matrix;
          const CMatrix& raise = ladder.creation.op.matrix;
          CMatrix acc = CMatrix::Zero(a.dim * b.dim, a.dim * b.dim);
          for (const auto& t : x.terms) {
            if (t.A.rows() != a.dim || t.A.cols() != a.dim) {
              throw InvalidArgument("assemble_witness: A operator dimension mismatch");
            }
            CMatrix mb = CMatrix::Identity(b.dim, b.dim);
            for (int i = 0; i < t.n; ++i) mb = lower * mb;
            for (int i = 0; i < t.m; ++i) mb = raise * mb;
            acc += t.coeff * kron(t.A, mb);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, CoherentIntegralWitness>) {
          if (!b.is_fock || !a.is_fock) throw InvalidArgument("assemble_witness: coherent witnesses need Fock spaces");
          if (!(x.decay > 0.0) && grid == nullptr) {
            throw InvalidArgument("assemble_witness: a non-decaying integrand needs an explicit cut-radius grid");
          }
          const quad::QuadratureGrid g = grid ? *grid : exact_grid(x, a, b);
          if (x.linear_family) return assemble_covariant(x, a, b, g);
          return assemble_dense(x, a, b, g);
        } else {
          CMatrix acc = CMatrix::Zero(a.dim * b.dim, a.dim * b.dim);
          for (const auto& p : x.pairs) {
            if (p.w.rows() != a.dim || p.h.rows() != b.dim) {
              throw InvalidArgument("assemble_witness: pair dimension mismatch");
            }
            acc += kron(p.w, p.h);
          }
          return acc;
        }
      },
      w);
  return fock::Operator{layout, std::move(m)};
}

ChoiExpectation choi_witness_expectation(const WitnessSpec& w, const channels::ChoiState& cs) {
  const fock::Operator wm = assemble_witness(w, cs.J.layout);
  if (wm.matrix.rows() != cs.J.matrix.rows()) throw InvalidArgument("choi_witness_expectation: dimension mismatch");
  const double ps = cs.J.matrix.trace().real();
  if (!(ps >= 1e-12)) throw NumericalFailure("choi_witness_expectation: P_s below 1e-12");
  const Complex e = fock::expectation(wm, cs.J);
  return {e.real() / ps, e.imag() / ps, ps};
}

Consistency consistency_check(const WitnessSpec& w, const fock::Operator& psi, const channels::Channel& channel,
                              const quad::QuadratureGrid& grid, std::optional<double> tolerance) {
  const bool dv = std::holds_alternative<QuditPairWitness>(w);
  const InputEnsemble ens = dv ? pair_ensemble(std::get<QuditPairWitness>(w), psi) : ensemble_from_state(psi, grid);
  Consistency c;
  c.ensemble_value = eb_value(w, ens, channel).value;
  c.choi_value = choi_witness_expectation(w, channels::choi_state(channel, psi)).value;
  c.gap = std::abs(c.ensemble_value - c.choi_value);
  c.tolerance = tolerance.value_or(dv ? 1e-10 : 1e-4);
  c.passed = c.gap <= c.tolerance;
  return c;
}

}  // namespace ebench::witness
