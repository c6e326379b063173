#include "nvdnp/spinops.hpp"

#include <doctest.h>

#include <random>

using namespace nvdnp;
using C = std::complex<double>;

namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = C(u(rng), u(rng));
  return 0.5 * (a + a.adjoint());
}

ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = C(u(rng), u(rng));
  return a;
}

// Truncated exponential series, independent of the spectral route.
ComplexMatrix taylor_exp(const ComplexMatrix& x, int order) {
  ComplexMatrix term = ComplexMatrix::Identity(x.rows(), x.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k <= order; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("spin_operators: spin-1/2 and spin-1 definitions") {
  const auto half = spin_operators(2);
  CHECK((half.z - ComplexMatrix(Eigen::Vector2cd(0.5, -0.5).asDiagonal())).norm() == doctest::Approx(0.0));
  const ComplexMatrix casimir = half.x * half.x + half.y * half.y + half.z * half.z;
  CHECK((casimir - 0.75 * identity(2)).norm() < 1e-15);

  const auto one = spin_operators(3);
  CHECK((one.z - ComplexMatrix(Eigen::Vector3cd(1.0, 0.0, -1.0).asDiagonal())).norm() < 1e-15);
  for (const auto* ops : {&half, &one}) {
    const C i(0, 1);
    CHECK((commutator(ops->x, ops->y) - i * ops->z).norm() < 1e-14);
    CHECK((commutator(ops->y, ops->z) - i * ops->x).norm() < 1e-14);
    CHECK((commutator(ops->z, ops->x) - i * ops->y).norm() < 1e-14);
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> ex(one.x);
  CHECK(ex.eigenvalues()(0) == doctest::Approx(-1.0));
  CHECK(ex.eigenvalues()(1) == doctest::Approx(0.0));
  CHECK(ex.eigenvalues()(2) == doctest::Approx(1.0));
}

TEST_CASE("spin_operators: unsupported multiplicity is rejected") {
  CHECK_THROWS_AS(spin_operators(4), std::invalid_argument);
  CHECK_THROWS_AS(spin_operators(1), std::invalid_argument);
}

TEST_CASE("spin_operators: long double instantiation") {
  const auto ops = spin_operators<long double>(3);
  const ComplexMatrixT<long double> c = ops.x * ops.x + ops.y * ops.y + ops.z * ops.z;
  CHECK(static_cast<double>((c - 2.0L * ComplexMatrixT<long double>::Identity(3, 3)).norm()) < 1e-18);
}

TEST_CASE("kron: identities and mixed product") {
  CHECK((kron(identity(2), identity(2)) - identity(4)).norm() == 0.0);
  const ComplexMatrix z = Eigen::Vector2cd(1.0, -1.0).asDiagonal();
  const ComplexMatrix expected = Eigen::Vector4cd(1.0, 1.0, -1.0, -1.0).asDiagonal();
  CHECK((kron(z, identity(2)) - expected).norm() == 0.0);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_matrix(rng, 2), b = random_matrix(rng, 2), c = random_matrix(rng, 2),
               d = random_matrix(rng, 2);
    CHECK((kron(a, b) * kron(c, d) - kron(a * c, b * d)).cwiseAbs().maxCoeff() < 1e-12);
  }
  const ComplexMatrix rect = ComplexMatrix::Ones(2, 3);
  CHECK(kron(rect, identity(3)).rows() == 6);
  CHECK(kron(rect, identity(3)).cols() == 9);
}

TEST_CASE("propagator: exact cases") {
  const ComplexMatrix zero = ComplexMatrix::Zero(4, 4);
  CHECK((propagator(zero, 3.7) - identity(4)).norm() == 0.0);

  const auto s = spin_operators(2);
  // 2 pi (1/2) dt = pi/2
  const ComplexMatrix quarter = propagator(s.z, 0.5);
  CHECK(std::abs(quarter(0, 0) - C(0, -1)) < 1e-14);
  CHECK(std::abs(quarter(1, 1) - C(0, 1)) < 1e-14);
  CHECK(std::abs(quarter(0, 1)) < 1e-14);
  // 2 pi (1/2) dt = pi
  const ComplexMatrix half_turn = propagator(s.z, 1.0);
  CHECK((half_turn + identity(2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("propagator: agrees with the truncated Taylor series") {
  std::mt19937_64 rng(11);
  const double dt = 0.01;
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix h = random_hermitian(rng, 4);
    h /= Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h).eigenvalues().cwiseAbs().maxCoeff();
    const ComplexMatrix series = taylor_exp(C(0, -2.0 * std::numbers::pi * dt) * h, 6);
    CHECK((propagator(h, dt) - series).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("propagator: rejects non-Hermitian input and negative time") {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(propagator(h, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(propagator(identity(2), -1.0), std::invalid_argument);
}

TEST_CASE("unitarity_defect: reference values") {
  CHECK(unitarity_defect(identity(3)) == 0.0);
  for (Eigen::Index n : {2, 4, 6}) {
    const ComplexMatrix twice = 2.0 * identity(n);
    CHECK(unitarity_defect(twice) == doctest::Approx(3.0 * std::sqrt(static_cast<double>(n))));
  }
}

TEST_CASE("property: propagators of random Hermitian matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> time(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const ComplexMatrix h = random_hermitian(rng, n);
    const double t1 = time(rng), t2 = time(rng);
    const ComplexMatrix u1 = propagator(h, t1);
    const ComplexMatrix u2 = propagator(h, t2);
    CHECK(unitarity_defect(u1) <= 1e-9);
    CHECK((u1 * u2 - propagator(h, t1 + t2)).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::ComplexEigenSolver<ComplexMatrix> general(h);
    CHECK(general.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-10 * h.norm());

    ComplexMatrix rho = random_hermitian(rng, n);
    rho = rho * rho;  // positive semidefinite
    rho /= rho.trace();
    const ComplexMatrix evolved = u1 * rho * u1.adjoint();
    CHECK(std::abs(evolved.trace() - C(1.0, 0.0)) < 1e-10);
  }
}
