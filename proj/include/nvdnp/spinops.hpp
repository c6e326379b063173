#pragma once

// Dense complex operator algebra for the small spin Hilbert spaces used by the
// simulator (dimension 2 to 6). Everything is templated on the real scalar so
// the same code serves double and long double checks.
//
// Unit convention: Hamiltonians are in MHz (linear frequency) and times in
// microseconds. The factor 2*pi appears only inside propagator().

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace nvdnp {

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = ComplexVectorT<double>;

template <typename Real>
struct SpinOperatorsT {
  ComplexMatrixT<Real> x;
  ComplexMatrixT<Real> y;
  ComplexMatrixT<Real> z;
};

using SpinOperators = SpinOperatorsT<double>;

/// Angular momentum matrices for spin-1/2 (multiplicity 2) or spin-1
/// (multiplicity 3) in the |m = s, ..., -s> basis.
template <typename Real = double>
SpinOperatorsT<Real> spin_operators(int multiplicity) {
  if (multiplicity != 2 && multiplicity != 3) {
    throw std::invalid_argument("spin_operators: multiplicity must be 2 or 3");
  }
  using C = std::complex<Real>;
  const Eigen::Index n = multiplicity;
  const Real s = Real(multiplicity - 1) / Real(2);

  ComplexMatrixT<Real> raise = ComplexMatrixT<Real>::Zero(n, n);
  ComplexMatrixT<Real> z = ComplexMatrixT<Real>::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Real m = s - Real(k);
    z(k, k) = C(m, 0);
    if (k > 0) {
      // <m+1| S+ |m>
      raise(k - 1, k) = C(std::sqrt(s * (s + 1) - m * (m + 1)), 0);
    }
  }
  const ComplexMatrixT<Real> lower = raise.adjoint();
  SpinOperatorsT<Real> ops;
  ops.x = (raise + lower) * C(Real(0.5), 0);
  ops.y = (raise - lower) * C(0, Real(-0.5));
  ops.z = z;
  return ops;
}

template <typename Real = double>
ComplexMatrixT<Real> identity(Eigen::Index dim) {
  return ComplexMatrixT<Real>::Identity(dim, dim);
}

/// Kronecker product A (x) B.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  static_assert(std::is_same_v<Scalar, typename DerivedB::Scalar>, "kron: scalar mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// max |H - H^dagger|
template <typename Derived>
auto hermiticity_defect(const Eigen::MatrixBase<Derived>& h) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("hermiticity_defect: matrix is not square");
  }
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// Hermitian within 1e-12 relative to the largest entry.
template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& h) {
  if (h.rows() != h.cols()) return false;
  if (h.size() == 0) return true;
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  const Real scale = h.cwiseAbs().maxCoeff();
  return hermiticity_defect(h) <= Real(1e-12) * scale;
}

/// Frobenius norm of U^dagger U - I.
template <typename Derived>
auto unitarity_defect(const Eigen::MatrixBase<Derived>& u) {
  if (u.rows() != u.cols()) {
    throw std::invalid_argument("unitarity_defect: matrix is not square");
  }
  using Scalar = typename Derived::Scalar;
  using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return (u.adjoint() * u - M::Identity(u.rows(), u.cols())).norm();
}

/// U = exp(-i 2 pi H dt) for Hermitian H in MHz and dt in microseconds, by
/// spectral decomposition.
template <typename Derived>
auto propagator(const Eigen::MatrixBase<Derived>& h,
                typename Eigen::NumTraits<typename Derived::Scalar>::Real dt) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!is_hermitian(h)) {
    throw std::invalid_argument("propagator: Hamiltonian is not Hermitian");
  }
  if (!(dt >= Real(0))) {
    throw std::invalid_argument("propagator: negative time step");
  }
  const M herm = (h + h.adjoint()) * Scalar(Real(0.5), 0);
  Eigen::SelfAdjointEigenSolver<M> eig(herm);
  const Real two_pi = Real(2) * std::numbers::pi_v<Real>;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> phases(herm.rows());
  for (Eigen::Index k = 0; k < herm.rows(); ++k) {
    phases(k) = std::polar(Real(1), -two_pi * eig.eigenvalues()(k) * dt);
  }
  const M& v = eig.eigenvectors();
  return M(v * phases.asDiagonal() * v.adjoint());
}

/// Commutator [A, B].
template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using M = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return M(a * b - b * a);
}

}  // namespace nvdnp
