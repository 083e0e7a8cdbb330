#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "trailer_lab/lqr.hpp"
#include "trailer_lab/riccati.hpp"

using namespace trailer_lab;
using Eigen::Matrix2d;
using Eigen::Vector2d;
using Mat1 = Eigen::Matrix<double, 1, 1>;

TEST(Riccati, ScalarEmbeddedAnalyticCase) {
  // Unstable scalar plant a = b = q = r = 1 gives 2p - p^2 + 1 = 0, so
  // p = 1 + sqrt(2); the second state is stable and unweighted.
  Matrix2d A;
  A << 1, 0, 0, -1;
  const Vector2d B(1, 0);
  Matrix2d Q;
  Q << 1, 0, 0, 0;
  const Matrix2d P = solve_care<double, 2, 1>(A, B, Q, Mat1{1.0});
  EXPECT_NEAR(P(0, 0), 1 + std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(P(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(P(1, 1), 0.0, 1e-12);
}

TEST(Riccati, UnstabilizableIsRejected) {
  // A = 0 with B = [1, 1]': the mode along [1, -1] is neither controllable
  // nor stable, so no stabilizing solution exists.
  const Matrix2d A = Matrix2d::Zero();
  const Vector2d B(1, 1);
  EXPECT_FALSE((is_stabilizable<double, 2, 1>(A, B)));
  EXPECT_THROW((solve_care<double, 2, 1>(A, B, Matrix2d::Identity(), Mat1{1.0})), RiccatiError);
}

TEST(Riccati, NonPositiveInputWeightIsRejected) {
  EXPECT_THROW((solve_care<double, 2, 1>(Matrix2d::Identity(), Vector2d(1, 0),
                                         Matrix2d::Identity(), Mat1{0.0})),
               RiccatiError);
}

TEST(Riccati, MatchesSignFunctionOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  int checked = 0;
  while (checked < 50) {
    Matrix2d A;
    A << n(rng), n(rng), n(rng), n(rng);
    const Vector2d B(n(rng), n(rng));
    Matrix2d G;
    G << n(rng), n(rng), n(rng), n(rng);
    const Matrix2d Q = G * G.transpose() + 0.1 * Matrix2d::Identity();
    const double r = 0.5 + std::abs(n(rng));
    if (!is_stabilizable<double, 2, 1>(A, B, 1e-3)) continue;
    const Matrix2d P = solve_care<double, 2, 1>(A, B, Q, Mat1{r});
    const Eigen::MatrixXd expected = oracle::care_sign_function(A, B, Q, Mat1{r});
    EXPECT_LT((P - expected).norm(), 1e-7 * (1 + expected.norm()));
    EXPECT_LT((care_residual<double, 2, 1>(A, B, Q, Mat1{r}, P)), 1e-9 * (1 + P.norm()));
    const Matrix2d closed = A - B * (B.transpose() * P) / r;
    EXPECT_LT(closed.eigenvalues().real().maxCoeff(), 0.0);
    ++checked;
  }
}

TEST(Riccati, SolutionIsSymmetricPositiveDefinite) {
  const LinearModeld m = linearize(0.3, -1.0, test_platform_params());
  const Matrix2d P = solve_care(m.A, m.B, LqWeights{});
  EXPECT_EQ(P(0, 1), P(1, 0));
  Eigen::SelfAdjointEigenSolver<Matrix2d> eig(P);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(Lyapunov, SolvesContinuousEquation) {
  Matrix2d A;
  A << -1, 2, 0, -3;
  Matrix2d C;
  C << 2, 1, 1, 4;
  const Matrix2d X = solve_lyapunov<double, 2>(A, C);
  EXPECT_LT((A.transpose() * X + X * A + C).norm(), 1e-12);
}

TEST(Detectability, ZeroWeightOnUnstablePlant) {
  const LinearModeld m = linearize(0.0, -1.0, test_platform_params());
  EXPECT_FALSE((is_detectable<double, 2, 2>(m.A, Matrix2d::Zero())));
  EXPECT_TRUE((is_detectable<double, 2, 2>(m.A, Matrix2d::Identity())));
}
