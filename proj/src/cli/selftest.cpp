// Built-in oracle and invariant checks behind `ebench selftest`. Each case is
// small enough to finish in well under a second.

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "ebench/cli/run.hpp"
#include "ebench/cv_benchmark.hpp"
#include "ebench/dv_benchmark.hpp"
#include "ebench/simd/kernels.hpp"

namespace ebench::cli {
namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void near(const std::string& what, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) {
      ok = false;
      detail << what << ": got " << got << ", want " << want << " +- " << tol << "; ";
    }
  }
  void that(const std::string& what, bool cond) {
    if (!cond) {
      ok = false;
      detail << what << "; ";
    }
  }
};

CMatrix power(const CMatrix& m, int k) {
  CMatrix out = CMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = out * m;
  return out;
}

CVector random_ket(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  CVector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(n01(rng), n01(rng));
  return v / v.norm();
}

std::vector<channels::ChannelSpec> dv_zoo(int d) {
  std::vector<channels::ChannelSpec> zoo = {channels::identity_spec(), channels::depolarizing_spec(0.3),
                                            channels::z_measure_prepare_spec(), channels::x_measure_prepare_spec()};
  for (int k = 1; k < d; ++k) zoo.push_back(channels::rank_k_random_spec(k, 7 + k));
  zoo.push_back(channels::filter_scale_spec(0.3, channels::depolarizing_spec(0.1)));
  return zoo;
}

using Body = std::function<void(Check&, std::mt19937_64&)>;

std::vector<std::pair<std::string, Body>> cases() {
  return {
      {"gauss-laguerre moments",
       [](Check& c, std::mt19937_64&) {
         const auto rule = quad::gauss_laguerre(16);
         double fact = 1.0;
         for (int k = 0; k < 32; ++k) {
           if (k > 0) fact *= k;
           double s = 0.0;
           for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
           c.near("moment " + std::to_string(k), s / fact, 1.0, 1e-10);
         }
       }},
      {"gaussian grid moments",
       [](Check& c, std::mt19937_64&) {
         const auto g = quad::gaussian_grid(0.7, 24, 24);
         double w = 0.0, m2 = 0.0, m4 = 0.0;
         for (std::size_t i = 0; i < g.size(); ++i) {
           w += g.weights[i];
           m2 += g.weights[i] * std::norm(g.nodes[i]);
           m4 += g.weights[i] * std::pow(std::norm(g.nodes[i]), 2);
         }
         c.near("total weight", w, 1.0, 1e-12);
         c.near("E|a|^2", m2, 1.0 / 0.7, 1e-10);
         c.near("E|a|^4", m4, 2.0 / 0.49, 1e-9);
       }},
      {"coherent state moments",
       [](Check& c, std::mt19937_64&) {
         const auto sp = fock::fock_space("A", 60);
         const Complex alpha(1.3, -0.8);
         const auto k = fock::coherent_ket(alpha, sp);
         const auto ops = fock::mode_operators(sp);
         c.near("norm", k.norm(), 1.0, 1e-12);
         const Complex mean = k.amplitudes.dot(ops.annihilation.op.matrix * k.amplitudes);
         c.near("re <a>", mean.real(), alpha.real(), 1e-12);
         c.near("im <a>", mean.imag(), alpha.imag(), 1e-12);
       }},
      {"anti-normal reordering n+m <= 6",
       [](Check& c, std::mt19937_64&) {
         const auto sp = fock::fock_space("B", 24);
         const auto ops = fock::mode_operators(sp);
         const CMatrix& b = ops.annihilation.op.matrix;
         const CMatrix& bd = ops.creation.op.matrix;
         double worst = 0.0;
         for (int n = 0; n <= 6; ++n) {
           for (int m = 0; n + m <= 6; ++m) {
             const CMatrix normal = power(bd, m) * power(b, n);
             CMatrix anti = CMatrix::Zero(sp.dim, sp.dim);
             for (const auto& t : witness::antinormal_reorder(n, m)) anti += t.coeff * power(b, t.n) * power(bd, t.m);
             worst = std::max(worst, (normal - anti).topLeftCorner(16, 16).cwiseAbs().maxCoeff());
           }
         }
         c.near("max entry error", worst, 0.0, 1e-9);
       }},
      {"threshold identity",
       [](Check& c, std::mt19937_64& rng) {
         std::uniform_real_distribution<double> u01(0.05, 0.95);
         for (int i = 0; i < 20; ++i) {
           const auto p = cv::GaussianBenchParams::from_witness(u01(rng), u01(rng), 0.0);
           c.near("1/u^2", 1.0 / p.u2, (1.0 + p.lambda + p.eta) / (1.0 + p.lambda), 1e-12);
         }
       }},
      {"cv identity violates",
       [](Check& c, std::mt19937_64&) {
         const auto sp = fock::fock_space("A", 30);
         const auto r = cv::fidelity_benchmark(channels::build_channel(channels::identity_spec(), sp), 1.0, 1.0, sp,
                                               cv::GridSpec{32, 32, 0.0});
         c.near("F_avg", r.F_avg, 1.0, 1e-6);
         c.near("margin", r.margin, 2.0 / 3.0 - 1.0, 2e-3);
         c.that("verdict violated", classify(r.margin, r.error_estimate) == Verdict::violated);
       }},
      {"cv filter invariance",
       [](Check& c, std::mt19937_64&) {
         const auto sp = fock::fock_space("A", 24);
         const auto base = channels::pure_loss_spec(0.5);
         const auto ref = cv::fidelity_benchmark(channels::build_channel(base, sp), 1.0, 0.5,
                                                 cv::make_grid(1.0, {24, 24, 0.0}), sp);
         const auto f = cv::fidelity_benchmark(channels::build_channel(channels::filter_scale_spec(0.1, base), sp),
                                               1.0, 0.5, cv::make_grid(1.0, {24, 24, 0.0}), sp);
         c.near("margin", f.margin, ref.margin, 1e-10);
         c.near("P_s", f.P_s, 0.1 * ref.P_s, 1e-12);
       }},
      {"dv identity",
       [](Check& c, std::mt19937_64&) {
         const auto sp = fock::qudit_space("A", 3);
         const auto ch = channels::build_channel(channels::identity_spec(), sp);
         const auto r1 = dv::schmidt_benchmark(ch, 1), r2 = dv::schmidt_benchmark(ch, 2);
         c.near("value", r1.value, 2.0, 1e-12);
         c.near("margin k=1", r1.margin, -1.0, 1e-12);
         c.near("margin k=2", r2.margin, -0.5, 1e-12);
       }},
      {"dv depolarizing",
       [](Check& c, std::mt19937_64&) {
         const auto sp = fock::qudit_space("A", 3);
         for (double p : {0.0, 0.25, 0.5, 0.6, 1.0}) {
           const auto r = dv::schmidt_benchmark(channels::build_channel(channels::depolarizing_spec(p), sp), 1);
           c.near("value at p=" + std::to_string(p), r.value, 2.0 * (1.0 - p), 1e-12);
         }
       }},
      {"dv measure-prepare saturation",
       [](Check& c, std::mt19937_64&) {
         for (int d : {2, 3}) {
           const auto sp = fock::qudit_space("A", d);
           const auto r = dv::schmidt_benchmark(channels::build_channel(channels::z_measure_prepare_spec(), sp), 1);
           c.near("margin d=" + std::to_string(d), r.margin, 0.0, 1e-12);
         }
       }},
      {"dv choi oracle",
       [](Check& c, std::mt19937_64&) {
         for (int d = 2; d <= 4; ++d) {
           const auto a = fock::qudit_space("A", d), b = fock::qudit_space("B", d);
           const auto phi = fock::maximally_entangled_ket(a, b);
           for (const auto& spec : dv_zoo(d)) {
             const auto ch = channels::build_channel(spec, a);
             const auto r = dv::schmidt_benchmark(ch, 1);
             const auto e = witness::choi_witness_expectation(dv::schmidt_witness_pairs(1, d),
                                                               channels::choi_state(ch, phi));
             c.near(channels::describe(spec) + " d=" + std::to_string(d), r.margin, e.value, 1e-10);
           }
         }
       }},
      {"rank-k soundness",
       [](Check& c, std::mt19937_64& rng) {
         const auto sp = fock::qudit_space("A", 3);
         for (int k = 1; k <= 2; ++k) {
           for (int i = 0; i < 10; ++i) {
             const auto ch = channels::build_channel(channels::rank_k_random_spec(k, rng()), sp);
             c.that("margin below -1e-9 for k=" + std::to_string(k), dv::schmidt_benchmark(ch, k).margin >= -1e-9);
           }
         }
       }},
      {"schmidt witness positivity",
       [](Check& c, std::mt19937_64& rng) {
         const CMatrix w = dv::schmidt_witness_matrix(1, 3);
         for (int i = 0; i < 50; ++i) {
           const CVector x = random_ket(rng, 3), y = random_ket(rng, 3);
           CVector xy(9);
           for (int p = 0; p < 3; ++p) xy.segment(3 * p, 3) = x(p) * y;
           c.that("negative product expectation", xy.dot(w * xy).real() >= -1e-10);
         }
       }},
      {"simd kernels match scalar",
       [](Check& c, std::mt19937_64& rng) {
         const CVector x = random_ket(rng, 37), y = random_ket(rng, 37);
         const auto& s = simd::scalar_table();
         const auto& a = simd::active();
         const auto r1 = s.dotc(simd::detail::raw(x.data()), simd::detail::raw(y.data()), 37);
         const auto r2 = a.dotc(simd::detail::raw(x.data()), simd::detail::raw(y.data()), 37);
         c.near("dotc re", r2.re, r1.re, 1e-14);
         c.near("dotc im", r2.im, r1.im, 1e-14);
       }},
      {"config round trip",
       [](Check& c, std::mt19937_64&) {
         RunConfig cfg;
         cfg.mode = Mode::sweep;
         cfg.channel = channels::filter_scale_spec(0.5, channels::heterodyne_spec(0.7, 20, 40));
         cfg.sweep = SweepConfig{"gain", 0.5, 1.5, 5, Mode::cv};
         cfg.format = Format::csv;
         c.that("parse(serialize(cfg)) != cfg", parse_config(serialize_config(cfg)) == cfg);
       }},
  };
}

}  // namespace

std::vector<SelftestCase> run_selftest(const RunConfig& cfg) {
  std::vector<SelftestCase> out;
  for (auto& [name, body] : cases()) {
    std::mt19937_64 rng(cfg.seed);
    Check c;
    SelftestCase sc;
    sc.name = name;
    try {
      body(c, rng);
      sc.passed = c.ok;
      sc.detail = c.detail.str();
    } catch (const std::exception& e) {
      sc.passed = false;
      sc.detail = std::string("threw: ") + e.what();
    }
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace ebench::cli
