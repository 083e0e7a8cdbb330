#pragma once

// Continuous algebraic Riccati equation
//   A'P + PA - P B R^-1 B' P + Q = 0
// solved through the stable invariant subspace of the Hamiltonian matrix,
// followed by Kleinman-Newton refinement steps.

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "trailer_lab/types.hpp"

namespace trailer_lab {

class RiccatiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves A'X + XA + C = 0 by Kronecker vectorization. Intended for the
/// small dense systems used here (N <= 4).
template <typename Scalar, int N>
Matrix<Scalar, N, N> solve_lyapunov(const Matrix<Scalar, N, N>& A, const Matrix<Scalar, N, N>& C) {
  constexpr int NN = N * N;
  using Big = Matrix<Scalar, NN, NN>;
  const Matrix<Scalar, N, N> I = Matrix<Scalar, N, N>::Identity();
  Big op = Big::Zero();
  // vec(A'X + XA) = (I (x) A' + A' (x) I) vec(X)  (column-major vec)
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      op.template block<N, N>(i * N, j * N) += I(i, j) * A.transpose();
      op.template block<N, N>(i * N, j * N) += A(j, i) * I;
    }
  const Vector<Scalar, NN> rhs = -Eigen::Map<const Vector<Scalar, NN>>(C.data());
  const Vector<Scalar, NN> x = op.colPivHouseholderQr().solve(rhs);
  Matrix<Scalar, N, N> X = Eigen::Map<const Matrix<Scalar, N, N>>(x.data());
  return (X + X.transpose()) / 2;
}

/// max-norm of the Riccati residual.
template <typename Scalar, int N, int M>
Scalar care_residual(const Matrix<Scalar, N, N>& A, const Matrix<Scalar, N, M>& B,
                     const Matrix<Scalar, N, N>& Q, const Matrix<Scalar, M, M>& R,
                     const Matrix<Scalar, N, N>& P) {
  const Matrix<Scalar, N, N> res = A.transpose() * P + P * A -
                                   P * B * R.ldlt().solve(B.transpose()) * P + Q;
  return res.cwiseAbs().maxCoeff();
}

struct CareOptions {
  int newton_passes = 2;
  double imaginary_axis_tol = 1e-10;
  double min_rcond = 1e-12;
  /// Closed-loop eigenvalues must satisfy Re < -stability_margin (1 + |A|).
  double stability_margin = 1e-8;
};

template <typename Scalar, int N, int M>
Matrix<Scalar, N, N> solve_care(const Matrix<Scalar, N, N>& A, const Matrix<Scalar, N, M>& B,
                                const Matrix<Scalar, N, N>& Q, const Matrix<Scalar, M, M>& R,
                                const CareOptions& options = {}) {
  using Complex = std::complex<Scalar>;
  using Ham = Matrix<Scalar, 2 * N, 2 * N>;
  using MatN = Matrix<Scalar, N, N>;
  using CMatN = Matrix<Complex, N, N>;

  const Eigen::LDLT<Matrix<Scalar, M, M>> r_ldlt(R);
  if (r_ldlt.info() != Eigen::Success || !(r_ldlt.vectorD().minCoeff() > 0))
    throw RiccatiError("input weight R must be positive definite");
  const MatN G = B * r_ldlt.solve(B.transpose());

  Ham H;
  H << A, -G, -Q, -A.transpose();

  Eigen::EigenSolver<Ham> eig(H, true);
  if (eig.info() != Eigen::Success) throw RiccatiError("Hamiltonian eigendecomposition failed");

  const Scalar scale = Scalar(1) + H.cwiseAbs().maxCoeff();
  Matrix<Complex, 2 * N, N> basis;
  int stable = 0;
  for (int i = 0; i < 2 * N; ++i) {
    const Scalar re = eig.eigenvalues()(i).real();
    if (std::abs(re) <= Scalar(options.imaginary_axis_tol) * scale)
      throw RiccatiError("Hamiltonian has eigenvalues on the imaginary axis");
    if (re < 0) {
      if (stable == N) throw RiccatiError("stable subspace dimension mismatch");
      basis.col(stable++) = eig.eigenvectors().col(i);
    }
  }
  if (stable != N) throw RiccatiError("stable subspace dimension mismatch");

  const CMatN U1 = basis.template topRows<N>();
  const CMatN U2 = basis.template bottomRows<N>();
  const Eigen::FullPivLU<CMatN> lu(U1);
  const Scalar rcond = lu.rcond();
  if (!(rcond > Scalar(options.min_rcond)))
    throw RiccatiError("stable invariant subspace is degenerate");

  // P = U2 U1^-1, real up to roundoff for a conjugate-closed basis.
  const CMatN Pc = U2 * lu.inverse();
  MatN P = Pc.real();
  P = (P + P.transpose()) / 2;

  for (int pass = 0; pass < options.newton_passes; ++pass) {
    const Matrix<Scalar, M, N> K = r_ldlt.solve(B.transpose() * P);
    const MatN closed = A - B * K;
    const MatN next = solve_lyapunov<Scalar, N>(closed, Q + K.transpose() * R * K);
    if (!next.allFinite()) break;
    if (care_residual<Scalar, N, M>(A, B, Q, R, next) > care_residual<Scalar, N, M>(A, B, Q, R, P))
      break;
    P = next;
  }

  // Uncontrollable modes on the imaginary axis can slip past the eigenvalue
  // split as a near-defective pair; they survive in the closed loop.
  const MatN closed = A - B * r_ldlt.solve(B.transpose() * P);
  const Scalar margin = Scalar(options.stability_margin) * (Scalar(1) + A.cwiseAbs().maxCoeff());
  if (!(closed.eigenvalues().real().maxCoeff() < -margin))
    throw RiccatiError("Riccati solution is not stabilizing");
  return P;
}

/// PBH test: every eigenvalue of A with Re >= 0 keeps [A - lambda I, B] at
/// full row rank.
template <typename Scalar, int N, int M>
bool is_stabilizable(const Matrix<Scalar, N, N>& A, const Matrix<Scalar, N, M>& B,
                     Scalar tol = Scalar(1e-9)) {
  using Complex = std::complex<Scalar>;
  Eigen::EigenSolver<Matrix<Scalar, N, N>> eig(A, false);
  for (int i = 0; i < N; ++i) {
    const Complex lambda = eig.eigenvalues()(i);
    if (lambda.real() < -tol) continue;
    Matrix<Complex, N, N + M> pencil;
    pencil << A.template cast<Complex>() - lambda * Matrix<Complex, N, N>::Identity(),
        B.template cast<Complex>();
    Eigen::JacobiSVD<Matrix<Complex, N, N + M>> svd(pencil);
    const Scalar top = std::max(Scalar(1), svd.singularValues()(0));
    if (svd.singularValues()(N - 1) <= tol * top) return false;
  }
  return true;
}

/// Detectability of (A, C) is stabilizability of (A', C').
template <typename Scalar, int N, int P>
bool is_detectable(const Matrix<Scalar, N, N>& A, const Matrix<Scalar, P, N>& C,
                   Scalar tol = Scalar(1e-9)) {
  return is_stabilizable<Scalar, N, P>(A.transpose(), C.transpose(), tol);
}

/// State feedback gain K = R^-1 B' P.
template <typename Scalar, int N, int M>
Matrix<Scalar, M, N> lq_gain(const Matrix<Scalar, N, N>& A, const Matrix<Scalar, N, M>& B,
                             const Matrix<Scalar, N, N>& Q, const Matrix<Scalar, M, M>& R) {
  const Matrix<Scalar, N, N> P = solve_care<Scalar, N, M>(A, B, Q, R);
  return R.ldlt().solve(B.transpose() * P);
}

}  // namespace trailer_lab
