#include "trailer_lab/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace trailer_lab {

void LqWeights::validate() const {
  if (!Q.allFinite()) throw ValidationError("weights.Q", "must be finite");
  if (std::abs(Q(0, 1) - Q(1, 0)) > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw ValidationError("weights.Q", "must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(Q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw ValidationError("weights.Q", "must be positive semidefinite");
  if (!(R > 0) || !std::isfinite(R)) throw ValidationError("weights.R", "must be > 0");
}

double GainSchedule::alpha_e_limit() const {
  return std::min(params.alpha_limit, max_alpha_e());
}

double GainSchedule::beta3_ref_limit() const {
  return equilibrium(alpha_e_limit(), params).beta3_e;
}

Eigen::Matrix2d solve_care(const Eigen::Matrix2d& A, const Eigen::Vector2d& B,
                           const LqWeights& weights) {
  const Eigen::Matrix<double, 1, 1> R{weights.R};
  return trailer_lab::solve_care<double, 2, 1>(A, B, weights.Q, R);
}

Gain lq_gain(const LinearModeld& model, const LqWeights& weights) {
  const Eigen::Matrix2d P = solve_care(model.A, model.B, weights);
  return (model.B.transpose() * P) / weights.R;
}

GainSchedule build_schedule(const VehicleParamsd& params, const LqWeights& weights,
                            int grid_count, double v_design) {
  params.validate();
  weights.validate();
  if (grid_count < 3 || grid_count % 2 == 0)
    throw ValidationError("grid_count", "must be odd and >= 3");
  if (v_design == 0.0) throw ValidationError("v_design", "must be nonzero");

  GainSchedule schedule;
  schedule.weights = weights;
  schedule.params = params;
  schedule.v_design = v_design;

  // Mirrored points are built as exact negations so the schedule stays
  // bit-symmetric.
  const int half = (grid_count - 1) / 2;
  const double end = kScheduleRangeFraction * alpha_max(params);
  schedule.grid.resize(grid_count);
  for (int i = 0; i <= half; ++i) {
    const double a = end * static_cast<double>(i) / static_cast<double>(half);
    schedule.grid[half - i] = -a;
    schedule.grid[half + i] = a;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> q_eig(weights.Q);
  const Eigen::Matrix2d q_sqrt = q_eig.operatorSqrt();
  schedule.gains.reserve(grid_count);
  for (double alpha_e : schedule.grid) {
    const LinearModeld model = linearize(alpha_e, v_design, params);
    std::ostringstream where;
    where << " at alpha_e = " << alpha_e;
    if (!is_stabilizable<double, 2, 1>(model.A, model.B))
      throw RiccatiError("(A, B) not stabilizable" + where.str());
    if (!is_detectable<double, 2, 2>(model.A, q_sqrt))
      throw RiccatiError("(A, Q^1/2) not detectable" + where.str());

    Eigen::Matrix2d P;
    try {
      P = solve_care(model.A, model.B, weights);
    } catch (const RiccatiError& e) {
      throw RiccatiError(e.what() + where.str());
    }
    const Eigen::Matrix<double, 1, 1> R{weights.R};
    const double residual = care_residual<double, 2, 1>(model.A, model.B, weights.Q, R, P);
    if (residual > 1e-9 * (1.0 + P.cwiseAbs().maxCoeff()))
      throw RiccatiError("Riccati residual too large" + where.str());
    const Gain gain = (model.B.transpose() * P) / weights.R;
    const Eigen::Matrix2d closed = model.A - model.B * gain;
    if (closed.eigenvalues().real().maxCoeff() >= 0.0)
      throw RiccatiError("closed loop not stable" + where.str());
    schedule.gains.push_back(gain);
  }
  return schedule;
}

Gain lookup_gain(const GainSchedule& schedule, double alpha_e) {
  const auto& grid = schedule.grid;
  if (grid.empty() || !(alpha_e >= grid.front() && alpha_e <= grid.back()))
    throw DomainError("alpha_e outside the gain schedule grid");
  const auto upper = std::upper_bound(grid.begin(), grid.end(), alpha_e);
  const auto hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
      upper - grid.begin(), static_cast<std::ptrdiff_t>(grid.size()) - 1));
  const std::size_t lo = hi - 1;
  if (alpha_e == grid[lo]) return schedule.gains[lo];
  if (alpha_e == grid[hi]) return schedule.gains[hi];
  // Written so that mirrored queries on a symmetric schedule produce exactly
  // mirrored results.
  const double to_hi = grid[hi] - alpha_e;
  const double from_lo = alpha_e - grid[lo];
  const double width = grid[hi] - grid[lo];
  return (schedule.gains[lo] * to_hi + schedule.gains[hi] * from_lo) / width;
}

double precompensate(double beta3_e, const VehicleParamsd& params) {
  if (!(std::abs(beta3_e) < std::numbers::pi / 2))
    throw DomainError("pre-compensation requires |beta3_e| < pi/2");
  if (beta3_e == 0.0) return 0.0;
  const double t = std::tan(std::abs(beta3_e));
  const double denom = std::sqrt(params.L3 * params.L3 * (1.0 + 1.0 / (t * t)) +
                                 params.L2 * params.L2 - params.M1 * params.M1);
  return sign(beta3_e) * std::atan(params.L1 / denom);
}

StabilizerOutput stabilizing_control(double beta3, double beta2, double beta3_ref,
                                     const GainSchedule& schedule) {
  StabilizerOutput out;
  const double ref_limit = schedule.beta3_ref_limit();
  const double ref = std::clamp(beta3_ref, -ref_limit, ref_limit);
  out.reference_clamped = ref != beta3_ref;

  const double alpha_limit = schedule.alpha_e_limit();
  out.alpha_e = std::clamp(precompensate(ref, schedule.params), -alpha_limit, alpha_limit);

  const EquilibriumPointd eq = equilibrium(out.alpha_e, schedule.params);
  const Gain gain = lookup_gain(schedule, out.alpha_e);
  const double correction = gain(0) * (beta3 - eq.beta3_e) + gain(1) * (beta2 - eq.beta2_e);
  const double raw = out.alpha_e - correction;
  const double steer_limit = schedule.params.alpha_limit;
  out.alpha = std::clamp(raw, -steer_limit, steer_limit);
  out.saturated = out.alpha != raw;
  return out;
}

}  // namespace trailer_lab
