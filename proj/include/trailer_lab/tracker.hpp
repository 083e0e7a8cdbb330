#pragma once

// Pure-pursuit path follower. Reversing legs anchor the look-ahead circle at
// the trailer axle and output a trailer joint-angle reference for the
// stabilizer; forward legs anchor at the truck rear axle and steer directly.

#include <numbers>
#include <optional>
#include <utility>

#include "trailer_lab/model.hpp"
#include "trailer_lab/path.hpp"
#include "trailer_lab/poses.hpp"

namespace trailer_lab {

struct TrackerConfig {
  double Lr = 0.5;               // look-ahead distance [m]
  double Kp = 0.3;               // proportional boost on the joint reference
  double goal_tolerance = 0.02;  // [m]

  void validate() const;
  bool operator==(const TrackerConfig&) const = default;
};

struct TrackerState {
  int leg_index = 0;
  double progress = 0.0;  // arc length along the current leg
  std::optional<Point2> last_lookahead;
  double last_beta3_ref = 0.0;
  double last_alpha = 0.0;
};

struct LookaheadResult {
  Point2 target = Point2::Zero();
  double arc_length = 0.0;
  double theta_e = 0.0;  // filled in by tracker_tick
  bool fallback_used = false;
};

struct AnchorPose {
  Point2 position = Point2::Zero();
  double heading = 0.0;  // body heading; travel is opposite to it when reversing
  Direction direction = Direction::reverse;
};

/// Search window ahead of the current progress, in multiples of Lr. Bounds
/// the look-ahead to the local part of self-crossing or repeated paths.
inline constexpr double kLookaheadWindowFactor = std::numbers::pi;

/// Leg geometry used for the look-ahead: the final segment is extended by Lr
/// so the target keeps moving along it up to the end of the leg.
Polyline lookahead_polyline(const PathLeg& leg, double Lr);

/// Forward-most crossing of the look-ahead circle with the current leg at or
/// beyond tracker.progress. Falls back to the nearest point in the search
/// window when the circle misses the path.
std::pair<LookaheadResult, TrackerState> locate_lookahead(const PiecewiseLinearPath& path,
                                                          const TrackerState& tracker,
                                                          const Point2& anchor, double Lr);

/// Bearing of the target relative to the direction of travel, in (-pi, pi].
double heading_error(const AnchorPose& anchor, const Point2& target);

/// Trailer joint angle that drives the trailer along the circle through the
/// look-ahead point: -atan(2 L3 sin(theta_e) / Lr).
double reverse_reference(double theta_e, double Lr, double L3);

/// beta3_d + Kp (beta3_d - beta3).
double proportional_boost(double beta3_d, double beta3, double Kp);

/// Curvature law atan(L1 * 2 sin(theta_e) / Lr) with the anchor at the truck
/// rear axle.
double forward_steering(double theta_e, double Lr, double L1);

struct TrackerOutput {
  Direction mode = Direction::reverse;
  double beta3_ref = 0.0;  // reverse legs
  double alpha = 0.0;      // forward legs, saturated to alpha_limit
  double beta3_d = 0.0;
  LookaheadResult lookahead;
  bool leg_completed = false;
  bool goal = false;  // last leg completed
  TrackerState next;
};

/// One high-level tick. On completing an intermediate leg the returned state
/// points at the start of the next leg and the previous command is held.
TrackerOutput tracker_tick(const VehicleStated& measured, const PiecewiseLinearPath& path,
                           const TrackerState& tracker, const TrackerConfig& config,
                           const VehicleParamsd& params);

}  // namespace trailer_lab
