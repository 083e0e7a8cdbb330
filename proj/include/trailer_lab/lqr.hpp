#pragma once

// Gain-scheduled LQ stabilizer for the joint angles. The schedule is indexed
// by the steering linearization point alpha_e; a desired trailer joint angle
// is mapped to alpha_e through the inverse of the circular-equilibrium
// relation (pre-compensation).

#include <vector>

#include <Eigen/Core>

#include "trailer_lab/model.hpp"
#include "trailer_lab/riccati.hpp"

namespace trailer_lab {

using Gain = Eigen::RowVector2d;

struct LqWeights {
  Eigen::Matrix2d Q = 10.0 * Eigen::Matrix2d::Identity();
  double R = 1.0;

  void validate() const;
  bool operator==(const LqWeights&) const = default;
};

/// Fraction of alpha_max covered by the schedule grid.
inline constexpr double kScheduleRangeFraction = 0.95;
inline constexpr double kDefaultDesignSpeed = -1.0;
inline constexpr int kDefaultGridCount = 101;

struct GainSchedule {
  std::vector<double> grid;  // strictly increasing, symmetric about 0
  std::vector<Gain> gains;
  LqWeights weights;
  VehicleParamsd params;
  double v_design = kDefaultDesignSpeed;

  double max_alpha_e() const { return grid.back(); }
  /// Largest |alpha_e| a reference may request: min(alpha_limit, grid end).
  double alpha_e_limit() const;
  /// Joint angle of the equilibrium at alpha_e_limit().
  double beta3_ref_limit() const;
};

/// Riccati solution for the linearized joint dynamics.
Eigen::Matrix2d solve_care(const Eigen::Matrix2d& A, const Eigen::Vector2d& B,
                           const LqWeights& weights);

/// L = R^-1 B' P for one linearization.
Gain lq_gain(const LinearModeld& model, const LqWeights& weights);

/// Builds gains over a symmetric grid on (-0.95, 0.95) * alpha_max.
/// grid_count must be odd and >= 3. Throws RiccatiError with the offending
/// alpha_e if any point fails.
GainSchedule build_schedule(const VehicleParamsd& params, const LqWeights& weights,
                            int grid_count = kDefaultGridCount,
                            double v_design = kDefaultDesignSpeed);

/// Linear interpolation between grid points; exact at grid points.
/// Throws DomainError outside the grid.
Gain lookup_gain(const GainSchedule& schedule, double alpha_e);

/// Steering linearization point whose circular equilibrium has trailer joint
/// angle beta3_e. Throws DomainError for |beta3_e| >= pi/2.
double precompensate(double beta3_e, const VehicleParamsd& params);

struct StabilizerOutput {
  double alpha = 0.0;     // saturated steering command
  double alpha_e = 0.0;   // linearization point after reference clamping
  bool reference_clamped = false;
  bool saturated = false;
};

/// alpha = alpha_e - L(alpha_e) (beta - beta_e(alpha_e)), saturated to the
/// steering limit.
StabilizerOutput stabilizing_control(double beta3, double beta2, double beta3_ref,
                                     const GainSchedule& schedule);

}  // namespace trailer_lab
