#pragma once

#include <cmath>

#include "trailer_lab/model.hpp"

namespace trailer_lab {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Point2 position() const { return {x, y}; }
};

/// Axle-center poses of every body in the chain plus the hitch point.
struct BodyPoses {
  Pose2 trailer;
  Pose2 dolly;
  Pose2 hitch;
  Pose2 truck;
};

/// Walks the chain forward from the trailer axle: the dolly axle sits L3 ahead
/// along the trailer heading, the hitch L2 ahead of it along the dolly
/// heading, and the truck rear axle M1 ahead of the hitch along the truck
/// heading.
inline BodyPoses derive_body_poses(const VehicleStated& state, const VehicleParamsd& params) {
  const double theta2 = wrap_angle(state.theta3 + state.beta3);
  const double theta1 = wrap_angle(theta2 + state.beta2);
  const double c3 = std::cos(state.theta3), s3 = std::sin(state.theta3);
  const double c2 = std::cos(theta2), s2 = std::sin(theta2);
  const double c1 = std::cos(theta1), s1 = std::sin(theta1);

  BodyPoses poses;
  poses.trailer = {state.x3, state.y3, state.theta3};
  poses.dolly = {state.x3 + params.L3 * c3, state.y3 + params.L3 * s3, theta2};
  poses.hitch = {poses.dolly.x + params.L2 * c2, poses.dolly.y + params.L2 * s2, theta2};
  poses.truck = {poses.hitch.x + params.M1 * c1, poses.hitch.y + params.M1 * s1, theta1};
  return poses;
}

}  // namespace trailer_lab
