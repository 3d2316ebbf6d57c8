#include "doctest.h"
#include "oracles.hpp"

#include "ebench/fock.hpp"

using namespace ebench;
using namespace ebench::fock;

TEST_CASE("spaces validate their size") {
  CHECK(fock_space("A", 10).dim == 11);
  CHECK(fock_space("A", 10).cutoff() == 10);
  CHECK_THROWS_AS(fock_space("A", 0), InvalidArgument);
  CHECK_THROWS_AS(qudit_space("Q", 1), InvalidArgument);
  CHECK_FALSE(qudit_space("Q", 3).is_fock);
}

TEST_CASE("coherent kets match the series") {
  for (Complex a : {Complex(0, 0), Complex(0.3, -0.2), Complex(1.5, 2.0), Complex(-3.0, 1.0)}) {
    const Space s = fock_space("A", 50);
    const StateVector k = coherent_ket(a, s);
    const CVector ref = oracle::coherent(a, s.dim);
    CHECK((k.amplitudes - ref).norm() < 1e-13);
    CHECK(k.truncation_defect == doctest::Approx(oracle::poisson_tail(std::norm(a), 50)).epsilon(1e-6));
  }
}

TEST_CASE("large amplitudes stay finite in the log domain") {
  const Space s = fock_space("A", 800);
  const Complex a(std::sqrt(600.0), 0.0);
  const StateVector k = coherent_ket(a, s);
  CHECK(std::isfinite(k.amplitudes.norm()));
  CHECK(k.norm() == doctest::Approx(1.0).epsilon(1e-9));
  // peak near n = |a|^2
  Eigen::Index arg = 0;
  k.amplitudes.cwiseAbs().maxCoeff(&arg);
  CHECK(std::abs(static_cast<double>(arg) - 600.0) <= 1.0);
}

TEST_CASE("truncation warning is raised for heavy tails") {
  const StateVector k = coherent_ket(Complex(4.0, 0.0), fock_space("A", 10));
  CHECK(k.truncation_warning);
  CHECK(k.truncation_defect == doctest::Approx(oracle::poisson_tail(16.0, 10)).epsilon(1e-9));
  CHECK(coherent_tail(16.0, 10) == doctest::Approx(oracle::poisson_tail(16.0, 10)).epsilon(1e-9));
  CHECK_FALSE(coherent_ket(Complex(0.5, 0.0), fock_space("A", 40)).truncation_warning);
}

TEST_CASE("recommended cutoff") {
  CHECK(recommended_cutoff(0.0) == 20);
  const int c = recommended_cutoff(100.0);
  CHECK(c >= 160);
  CHECK(oracle::poisson_tail(100.0, c) < 1e-10);
}

TEST_CASE("ladder operators") {
  const Space s = fock_space("A", 12);
  const LadderPair l = mode_operators(s);
  const CMatrix& a = l.annihilation.op.matrix;
  CHECK((a - oracle::annihilation(s.dim)).norm() < 1e-15);
  CHECK((l.creation.op.matrix - a.adjoint()).norm() < 1e-15);
  const CMatrix comm = a * a.adjoint() - a.adjoint() * a;
  CHECK((comm.topLeftCorner(12, 12) - CMatrix::Identity(12, 12)).norm() < 1e-12);
}

TEST_CASE("two-mode squeezed state marginals") {
  const double xi = 0.6;
  const Space a = fock_space("A", 40), b = fock_space("B", 40);
  const StateVector t = two_mode_squeezed_ket(xi, a, b);
  CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Operator rb = partial_trace(projector(t), "B");
  for (int n = 0; n < 10; ++n) {
    CHECK(rb.matrix(n, n).real() == doctest::Approx((1 - xi * xi) * std::pow(xi, 2 * n)).epsilon(1e-10));
  }
  CHECK(rb.matrix.diagonal().imag().cwiseAbs().maxCoeff() < 1e-14);
  // entangled: partial transpose has a negative eigenvalue
  CHECK(min_eigenvalue(partial_transpose(projector(t), "B").matrix) < -0.1);
}

TEST_CASE("tensor, partial trace and expectation") {
  const Space a = fock_space("A", 3), b = fock_space("B", 4);
  const StateVector x = coherent_ket(Complex(0.4, 0.1), a);
  const StateVector y = basis_ket(b, 2);
  const StateVector xy = tensor(x, y);
  CHECK(xy.amplitudes.size() == 4 * 5);
  CHECK((partial_trace(projector(xy), "A").matrix - projector(x).matrix).norm() < 1e-14);
  CHECK(expectation(identity(xy.layout), xy).real() == doctest::Approx(xy.norm() * xy.norm()));
  CHECK_THROWS_AS(tensor(x, x), InvalidArgument);
  CHECK_THROWS_AS(find_tag(xy.layout, "C"), InvalidArgument);
  CHECK(find_tag(xy.layout, "B") == 1);
}

TEST_CASE("maximally entangled state") {
  const Space a = qudit_space("A", 3), b = qudit_space("B", 3);
  const StateVector phi = maximally_entangled_ket(a, b);
  const Operator ra = partial_trace(projector(phi), "A");
  CHECK((ra.matrix - CMatrix::Identity(3, 3) / 3.0).norm() < 1e-14);
}

TEST_CASE("purity detection and factorization") {
  const Space a = fock_space("A", 5);
  const Operator p = projector(coherent_ket(Complex(0.7, 0.0), a));
  CHECK(as_pure(p).has_value());
  Operator mixed = p;
  mixed.matrix = 0.5 * p.matrix + 0.5 * projector(basis_ket(a, 3)).matrix;
  CHECK_FALSE(as_pure(mixed).has_value());
  const CMatrix f = factorize(mixed);
  CHECK((f * f.adjoint() - mixed.matrix).norm() < 1e-12);
  CHECK(mixed.hermiticity_defect() < 1e-15);
}
