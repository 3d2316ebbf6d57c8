#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "ebench/cv_benchmark.hpp"

using namespace ebench;
using namespace ebench::cv;

namespace {

FidelityBenchReport run(const channels::ChannelSpec& spec, double lambda, double eta, int cutoff = 40,
                        GridSpec g = {}) {
  const auto s = fock::fock_space("A", cutoff);
  return fidelity_benchmark(channels::build_channel(spec, s), lambda, eta, s, g);
}

}  // namespace

TEST_CASE("threshold and optimal gain") {
  CHECK(benchmark_threshold(1.0, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(benchmark_threshold(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(benchmark_threshold(2.0, 0.0) == 1.0);
  CHECK(heterodyne_optimal_gain(1.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(benchmark_threshold(-1.0, 1.0), InvalidArgument);
}

TEST_CASE("witness parameters and ensemble parameters") {
  const auto p = GaussianBenchParams::from_lambda_eta(1.5, 0.8, 0.05);
  CHECK_NOTHROW(p.validate());
  const auto q = GaussianBenchParams::from_witness(p.xi, p.u2, p.X);
  CHECK(q.lambda == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(q.eta == doctest::Approx(0.8).epsilon(1e-13));
  GaussianBenchParams bad = p;
  bad.lambda += 1e-3;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(GaussianBenchParams::from_lambda_eta(0.1, 1.0, 0.2), InvalidArgument);
  CHECK_THROWS_AS(GaussianBenchParams::from_witness(1.0, 0.5), InvalidArgument);
}

TEST_CASE("orientation: 1/u^2 = (1+lambda+eta)/(1+lambda)") {
  std::mt19937_64 rng(oracle::test_seed());
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    const auto p = GaussianBenchParams::from_witness(u(rng), u(rng));
    CHECK(std::abs(1.0 / p.u2 - (1.0 + p.lambda + p.eta) / (1.0 + p.lambda)) < 1e-12);
  }
}

TEST_CASE("identity channel fidelity") {
  for (double eta : {1.0, 0.5, 2.0}) {
    const auto r = run(channels::identity_spec(), 1.0, eta);
    CHECK(r.F_avg / r.P_s == doctest::Approx(oracle::loss_fidelity(1.0, 1.0, eta)).epsilon(1e-8));
    CHECK(r.margin == doctest::Approx(benchmark_threshold(1.0, eta) - r.F_avg / r.P_s).epsilon(1e-14));
  }
}

TEST_CASE("pure loss fidelity") {
  for (double tau : {0.3, 0.64, 0.9}) {
    for (double lambda : {0.5, 1.0, 3.0}) {
      const auto r = run(channels::pure_loss_spec(tau), lambda, 0.64);
      // the reported budget covers the deviation from the closed form (plus roundoff)
      CHECK(std::abs(r.F_avg / r.P_s - oracle::loss_fidelity(tau, lambda, 0.64)) <= r.error_estimate + 1e-11);
    }
  }
}

TEST_CASE("heterodyne fidelity against the Gaussian integral") {
  for (double G : {0.3, 0.5, 0.8, 1.2}) {
    const auto r = run(channels::heterodyne_spec(G), 1.0, 1.0);
    CHECK(r.F_avg / r.P_s == doctest::Approx(oracle::heterodyne_fidelity(G, 1.0, 1.0)).epsilon(1e-5));
    CHECK(r.margin >= -1e-6);
  }
  const auto best = run(channels::heterodyne_spec(heterodyne_optimal_gain(2.0, 0.5)), 2.0, 0.5);
  CHECK(std::abs(best.margin) < 1e-5);
}

TEST_CASE("flat ensemble at lambda = 0") {
  const auto r = run(channels::identity_spec(), 0.0, 1.0, 60, GridSpec{32, 32, 3.0});
  CHECK(r.flat);
  CHECK(r.alpha_max == 3.0);
  CHECK(r.F_avg / r.P_s == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.margin == doctest::Approx(-0.5).epsilon(1e-8));
  const auto def = run(channels::identity_spec(), 0.0, 1.0, 60, GridSpec{32, 32, 0.0});
  CHECK(def.alpha_max == kDefaultFlatRadius);
  const auto s = fock::fock_space("A", 20);
  CHECK_THROWS_AS(gaussian_coherent_ensemble(0.0, quad::gaussian_grid(1.0, 4, 4), s), InvalidArgument);
}

TEST_CASE("margins do not depend on filter scaling") {
  for (double q : {0.1, 0.3, 1.0}) {
    const auto base = run(channels::pure_loss_spec(0.7), 1.0, 0.5, 30, {32, 32, 0});
    const auto f = run(channels::filter_scale_spec(q, channels::pure_loss_spec(0.7)), 1.0, 0.5, 30, {32, 32, 0});
    CHECK(std::abs(f.margin - base.margin) < 1e-10);
    CHECK(f.P_s == doctest::Approx(q * base.P_s).epsilon(1e-12));
    CHECK(f.raw_margin == doctest::Approx(q * base.raw_margin).epsilon(1e-9));
  }
}

TEST_CASE("truncation is accounted for") {
  // small cutoff: far nodes are dropped and reported
  const auto s = fock::fock_space("A", 6);
  const auto ens = gaussian_coherent_ensemble(0.5, quad::gaussian_grid(0.5, 16, 8), s);
  CHECK(ens.dropped_weight > 0.0);
  CHECK(ens.truncation_error > 0.0);
  const auto r = run(channels::identity_spec(), 0.5, 1.0, 6, {16, 8, 0});
  CHECK(r.error_estimate >= (r.dropped_weight + r.truncation_error) / r.P_s);
  CHECK(r.cutoff == 6);
  CHECK(r.orientation.find("1/u^2") != std::string::npos);
}

TEST_CASE("regulated witness: fidelity formula and Choi expectation") {
  const int cutoff = 20;
  const auto a = fock::fock_space("A", cutoff), b = fock::fock_space("B", cutoff);
  const double xi = 0.6, u2 = 0.8;
  for (const auto& spec : {channels::identity_spec(), channels::pure_loss_spec(0.5)}) {
    const auto ch = channels::build_channel(spec, a);
    for (double X : {0.1, 0.01}) {
      const auto f = regulated_witness_value(ch, xi, u2, X, a, GridSpec{48, 48, 0});
      const auto c = regulated_witness_choi_value(ch, xi, u2, X, a, b);
      CHECK(std::abs(f.value - c.value) < 1e-4);
    }
  }
}

TEST_CASE("explicit regulated witness matrix is Hermitian") {
  const auto a = fock::fock_space("A", 4), b = fock::fock_space("B", 4);
  const auto w = regulated_witness_matrix(0.1, 0.6, 0.4, a, b);
  CHECK(w.hermiticity_defect() < 1e-12);
  CHECK(w.dim() == 25);
}

TEST_CASE("richardson extrapolation is exact on polynomials") {
  auto f = [](double x) { return 1.0 - 2.0 * x + 3.0 * x * x; };
  const std::vector<double> x = {0.1, 0.05, 0.025};
  CHECK(richardson_limit(x, {f(x[0]), f(x[1]), f(x[2])}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(richardson_limit({0.5}, {7.0}) == 7.0);
  CHECK_THROWS_AS(richardson_limit({}, {}), InvalidArgument);
}
