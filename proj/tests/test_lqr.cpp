#include <cmath>

#include <gtest/gtest.h>

#include "trailer_lab/lqr.hpp"
#include "trailer_lab/riccati.hpp"

using namespace trailer_lab;
using Eigen::Matrix2d;

namespace {

const VehicleParamsd kParams = test_platform_params();

const GainSchedule& default_schedule() {
  static const GainSchedule schedule = build_schedule(kParams, LqWeights{});
  return schedule;
}

}  // namespace

TEST(LqWeights, Validation) {
  LqWeights w;
  EXPECT_NO_THROW(w.validate());
  w.Q(0, 1) = 1.0;
  try {
    w.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "weights.Q");
  }
  w = LqWeights{};
  w.Q(0, 0) = -1.0;
  EXPECT_THROW(w.validate(), ValidationError);
  w = LqWeights{};
  w.R = 0.0;
  try {
    w.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "weights.R");
  }
}

TEST(Schedule, GridShape) {
  const GainSchedule& s = default_schedule();
  ASSERT_EQ(s.grid.size(), 101u);
  EXPECT_EQ(s.grid[50], 0.0);
  EXPECT_FALSE(std::signbit(s.grid[50]));
  EXPECT_NEAR(s.grid.back(), 0.95 * alpha_max(kParams), 1e-15);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    EXPECT_EQ(s.grid[i], -s.grid[s.grid.size() - 1 - i]);
    if (i > 0) {
      EXPECT_LT(s.grid[i - 1], s.grid[i]);
    }
  }
}

TEST(Schedule, RejectsEvenOrSmallGrid) {
  EXPECT_THROW(build_schedule(kParams, LqWeights{}, 4), ValidationError);
  EXPECT_THROW(build_schedule(kParams, LqWeights{}, 1), ValidationError);
  EXPECT_NO_THROW(build_schedule(kParams, LqWeights{}, 3));
}

TEST(Schedule, GainsAreEvenInAlpha) {
  const GainSchedule& s = default_schedule();
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const Gain& a = s.gains[i];
    const Gain& b = s.gains[s.grid.size() - 1 - i];
    EXPECT_NEAR(a(0), b(0), 1e-8);
    EXPECT_NEAR(a(1), b(1), 1e-8);
  }
}

TEST(Schedule, RiccatiResidualAndClosedLoop) {
  const GainSchedule& s = default_schedule();
  const Eigen::Matrix<double, 1, 1> R{1.0};
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const LinearModeld m = linearize(s.grid[i], -1.0, kParams);
    const Matrix2d P = solve_care(m.A, m.B, s.weights);
    EXPECT_LT((care_residual<double, 2, 1>(m.A, m.B, s.weights.Q, R, P)), 1e-9 * (1 + P.norm()));
    const Matrix2d closed = m.A - m.B * s.gains[i];
    EXPECT_LT(closed.eigenvalues().real().maxCoeff(), 0.0);
  }
}

TEST(Schedule, GainEqualsInputWeightedCostGradient) {
  const LinearModeld m = linearize(0.2, -1.0, kParams);
  LqWeights w;
  w.R = 2.5;
  const Matrix2d P = solve_care(m.A, m.B, w);
  const Gain expected = m.B.transpose() * P / 2.5;
  EXPECT_LT((lq_gain(m, w) - expected).norm(), 1e-14);
}

TEST(Schedule, ZeroStateWeightIsRejected) {
  LqWeights w;
  w.Q.setZero();
  EXPECT_THROW(build_schedule(kParams, w, 3), RiccatiError);
}

TEST(Lookup, ExactAtGridPoints) {
  const GainSchedule& s = default_schedule();
  for (std::size_t i = 0; i < s.grid.size(); ++i) EXPECT_EQ(lookup_gain(s, s.grid[i]), s.gains[i]);
}

TEST(Lookup, MidpointsWithinOnePercentOfDenseSolve) {
  const GainSchedule& s = default_schedule();
  for (std::size_t i = 0; i + 1 < s.grid.size(); ++i) {
    const double mid = (s.grid[i] + s.grid[i + 1]) / 2;
    const Gain exact = lq_gain(linearize(mid, -1.0, kParams), s.weights);
    const Gain interp = lookup_gain(s, mid);
    EXPECT_LT((interp - exact).norm() / exact.norm(), 0.01) << "alpha_e = " << mid;
  }
}

TEST(Lookup, MirroredQueriesGiveMirroredGains) {
  const GainSchedule& s = default_schedule();
  for (double a : {0.0013, 0.1, 0.2345, 0.44}) EXPECT_EQ(lookup_gain(s, a), lookup_gain(s, -a));
}

TEST(Lookup, OutsideGridThrows) {
  const GainSchedule& s = default_schedule();
  EXPECT_THROW(lookup_gain(s, s.grid.back() * 1.001), DomainError);
  EXPECT_THROW(lookup_gain(s, std::nan("")), DomainError);
}

TEST(Precompensation, RoundTripsEquilibrium) {
  const double limit = equilibrium(std::nextafter(alpha_max(kParams), 0.0), kParams).beta3_e;
  for (int i = 0; i < 101; ++i) {
    const double b = -1.4 + 2.8 * i / 100.0;
    if (!(std::abs(b) < limit)) continue;
    const double a = precompensate(b, kParams);
    EXPECT_NEAR(equilibrium(a, kParams).beta3_e, b, 1e-9);
  }
}

TEST(Precompensation, OddAndInverseOfEquilibrium) {
  for (double a : {0.01, 0.1, 0.3, 0.46}) {
    const double b = equilibrium(a, kParams).beta3_e;
    EXPECT_NEAR(precompensate(b, kParams), a, 1e-12);
    EXPECT_EQ(precompensate(-b, kParams), -precompensate(b, kParams));
  }
  EXPECT_THROW(precompensate(std::numbers::pi / 2, kParams), DomainError);
}

TEST(Stabilizer, HoldsEquilibrium) {
  const GainSchedule& s = default_schedule();
  const EquilibriumPointd eq = equilibrium(0.2, kParams);
  const StabilizerOutput out = stabilizing_control(eq.beta3_e, eq.beta2_e, eq.beta3_e, s);
  EXPECT_NEAR(out.alpha_e, 0.2, 1e-12);
  EXPECT_NEAR(out.alpha, 0.2, 1e-9);
  EXPECT_FALSE(out.saturated);
  EXPECT_FALSE(out.reference_clamped);
}

TEST(Stabilizer, ClampsReferenceAndSaturates) {
  const GainSchedule& s = default_schedule();
  const StabilizerOutput out = stabilizing_control(-1.0, -1.0, 1.45, s);
  EXPECT_TRUE(out.reference_clamped);
  EXPECT_NEAR(out.alpha_e, s.alpha_e_limit(), 1e-12);
  EXPECT_TRUE(out.saturated);
  EXPECT_EQ(std::abs(out.alpha), kParams.alpha_limit);
}

TEST(Stabilizer, OddInState) {
  const GainSchedule& s = default_schedule();
  for (double b : {0.05, 0.3, 0.9}) {
    const auto p = stabilizing_control(b, -b / 2, b / 3, s);
    const auto m = stabilizing_control(-b, b / 2, -b / 3, s);
    EXPECT_EQ(p.alpha, -m.alpha);
  }
}

TEST(Linearization, OriginValues) {
  const LinearModeld m = linearize(0.0, -1.0, kParams);
  EXPECT_NEAR(m.A(0, 0), 2.898550724637681, 1e-12);
  EXPECT_NEAR(m.A(0, 1), -7.142857142857143, 1e-12);
  EXPECT_NEAR(m.A(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(m.A(1, 1), 7.142857142857143, 1e-12);
  EXPECT_NEAR(m.B(0), 0.036 / (0.19 * 0.14), 1e-12);
  EXPECT_NEAR(m.B(1), -(1 / 0.19 + 0.036 / (0.19 * 0.14)), 1e-12);
  EXPECT_NEAR(m.B(0), 1.353, 1e-3);
  EXPECT_NEAR(m.B(1), -6.617, 1e-3);
}

TEST(Schedule, ZeroStateWeightOnStablePlantGivesZeroGain) {
  const LinearModeld m = linearize(0.2, 1.0, kParams);
  LqWeights w;
  w.Q.setZero();
  EXPECT_EQ(lq_gain(m, w), Gain::Zero());
}
