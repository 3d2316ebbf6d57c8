#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "ebench/dv_benchmark.hpp"

using namespace ebench;
using namespace ebench::dv;

namespace {
channels::Channel make(const channels::ChannelSpec& s, int d) { return channels::build_channel(s, fock::qudit_space("A", d)); }
}  // namespace

TEST_CASE("generalized Pauli operators") {
  for (int d = 2; d <= 6; ++d) {
    const auto p = gen_pauli(d);
    CHECK((p.Z - oracle::clock(d)).norm() < 1e-14);
    CHECK((p.X - oracle::shift(d)).norm() < 1e-14);
  }
  CHECK_THROWS_AS(gen_pauli(1), InvalidArgument);
}

TEST_CASE("mutually unbiased bases") {
  for (int d = 2; d <= 5; ++d) {
    const auto m = mub_bases(d);
    CHECK((m.fourier.adjoint() * m.fourier - CMatrix::Identity(d, d)).norm() < 1e-13);
    CHECK((m.computational.adjoint() * m.fourier).cwiseAbs2().maxCoeff() == doctest::Approx(1.0 / d));
    CHECK((m.fourier - oracle::fourier(d)).norm() < 1e-13);
  }
}

TEST_CASE("g values") {
  CHECK(g_value(1, 3) == doctest::Approx(1.0));
  CHECK(g_value(2, 3) == doctest::Approx(1.5));
  CHECK(g_value(1, 2) == doctest::Approx(1.0));
  for (int d = 2; d <= 6; ++d) CHECK(g_value(d, d) == doctest::Approx(2.0));
  CHECK_THROWS_AS(g_value(0, 3), InvalidArgument);
}

TEST_CASE("Schmidt witness operator") {
  for (int d = 2; d <= 4; ++d) {
    for (int k = 1; k < d; ++k) CHECK((schmidt_witness_matrix(k, d) - oracle::schmidt_witness(k, d)).norm() < 1e-12);
  }
}

TEST_CASE("benchmark values for the zoo") {
  for (int d = 2; d <= 5; ++d) {
    const auto id = schmidt_benchmark(make(channels::identity_spec(), d), 1);
    CHECK(id.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(id.raw_value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(id.margin == doctest::Approx(g_value(1, d) - 2.0).epsilon(1e-12));
    for (double p : {0.2, 0.5, 0.9}) {
      const auto r = schmidt_benchmark(make(channels::depolarizing_spec(p), d), 1);
      CHECK(r.value == doctest::Approx(2.0 * (1.0 - p)).epsilon(1e-12));
      CHECK(r.value == doctest::Approx(oracle::schmidt_value(oracle::depolarizing(p, d), d)).epsilon(1e-12));
    }
    const auto z = schmidt_benchmark(make(channels::z_measure_prepare_spec(), d), 1);
    CHECK(z.value == doctest::Approx(oracle::schmidt_value(oracle::dephase_in(CMatrix::Identity(d, d)), d)).epsilon(1e-12));
    CHECK(std::abs(z.imag) < 1e-12);
  }
}

TEST_CASE("measure-prepare saturation for d = 2, 3") {
  for (int d : {2, 3}) {
    CHECK(std::abs(schmidt_benchmark(make(channels::z_measure_prepare_spec(), d), 1).margin) < 1e-12);
    CHECK(std::abs(schmidt_benchmark(make(channels::x_measure_prepare_spec(), d), 1).margin) < 1e-12);
  }
}

TEST_CASE("benchmark equals the normalized Choi expectation") {
  for (int d = 2; d <= 4; ++d) {
    const auto a = fock::qudit_space("A", d), b = fock::qudit_space("B", d);
    const auto phi = fock::maximally_entangled_ket(a, b);
    for (const auto& spec : {channels::identity_spec(), channels::depolarizing_spec(0.4), channels::rank_k_random_spec(1, 3),
                             channels::filter_scale_spec(0.3, channels::x_measure_prepare_spec())}) {
      const auto ch = channels::build_channel(spec, a);
      for (int k = 1; k < d; ++k) {
        const auto r = schmidt_benchmark(ch, k);
        const CMatrix J = channels::choi_state(ch, phi).J.matrix;
        CHECK(std::abs(r.margin - oracle::choi_expectation(oracle::schmidt_witness(k, d), J)) < 1e-10);
      }
    }
  }
}

TEST_CASE("trace-decreasing channels are normalized by P_s") {
  const auto base = schmidt_benchmark(make(channels::depolarizing_spec(0.25), 3), 1);
  for (double q : {0.1, 0.3, 1.0}) {
    const auto r = schmidt_benchmark(make(channels::filter_scale_spec(q, channels::depolarizing_spec(0.25)), 3), 1);
    CHECK(std::abs(r.margin - base.margin) < 1e-12);
    CHECK(r.P_s == doctest::Approx(q));
    CHECK(r.raw_margin == doctest::Approx(q * base.margin).epsilon(1e-12));
  }
}

TEST_CASE("rank-k channels never beat the class-k bound") {
  for (auto [d, k] : {std::pair{3, 1}, std::pair{3, 2}, std::pair{4, 2}}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CHECK(schmidt_benchmark(make(channels::rank_k_random_spec(k, seed), d), k).margin >= -1e-9);
    }
  }
}

TEST_CASE("benchmark input validation") {
  const auto ch = make(channels::identity_spec(), 3);
  CHECK_THROWS_AS(schmidt_benchmark(ch, 0), InvalidArgument);
  CHECK_THROWS_AS(schmidt_benchmark(ch, 3), InvalidArgument);
}

TEST_CASE("finite-dimensional conversion") {
  const int d = 3;
  const auto a = fock::qudit_space("A", d), b = fock::qudit_space("B", d);
  const auto phi = fock::projector(fock::maximally_entangled_ket(a, b));
  const auto w = schmidt_witness_pairs(1, d);
  const Conversion conv = finite_dim_conversion(w, phi);
  // caller-chosen eigenbases give the same numbers
  std::vector<CMatrix> bases;
  std::vector<RVector> evals;
  for (const auto& pr : w.pairs) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pr.h);
    bases.push_back(es.eigenvectors());
    evals.push_back(es.eigenvalues());
  }
  const Conversion conv2 = finite_dim_conversion(w, phi, bases, evals);
  for (const auto& spec : {channels::identity_spec(), channels::depolarizing_spec(0.7), channels::z_measure_prepare_spec()}) {
    const auto ch = channels::build_channel(spec, a);
    const double direct = schmidt_benchmark(ch, 1).margin;
    CHECK(conv.evaluate(ch).value == doctest::Approx(direct).epsilon(1e-12));
    CHECK(conv2.evaluate(ch).value == doctest::Approx(direct).epsilon(1e-12));
  }
}
