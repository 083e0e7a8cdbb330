#include "trailer_lab/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace trailer_lab {

void TrackerConfig::validate() const {
  if (!(Lr > 0) || !std::isfinite(Lr)) throw ValidationError("tracker.Lr", "must be > 0");
  if (!(Kp >= 0) || !std::isfinite(Kp)) throw ValidationError("tracker.Kp", "must be >= 0");
  if (!(goal_tolerance > 0) || !std::isfinite(goal_tolerance))
    throw ValidationError("tracker.goal_tolerance", "must be > 0");
}

Polyline lookahead_polyline(const PathLeg& leg, double Lr) {
  std::vector<Point2> points = leg.waypoints;
  const Point2 end = points.back();
  const Point2 dir = (end - points[points.size() - 2]).normalized();
  points.push_back(end + Lr * dir);
  return Polyline(std::move(points));
}

std::pair<LookaheadResult, TrackerState> locate_lookahead(const PiecewiseLinearPath& path,
                                                          const TrackerState& tracker,
                                                          const Point2& anchor, double Lr) {
  const Polyline line = lookahead_polyline(path.legs.at(tracker.leg_index), Lr);
  const double s_min = tracker.progress;
  const double s_max = tracker.progress + kLookaheadWindowFactor * Lr;

  LookaheadResult result;
  const std::vector<double> crossings = line.circle_crossings(anchor, Lr, s_min, s_max);
  if (!crossings.empty()) {
    result.arc_length = crossings.back();
    result.target = line.point_at(result.arc_length);
  } else {
    const PolylinePoint nearest = line.nearest(anchor, s_min, s_max);
    result.arc_length = nearest.arc_length;
    result.target = nearest.point;
    result.fallback_used = true;
  }

  TrackerState next = tracker;
  next.progress = std::max(tracker.progress, result.arc_length);
  next.last_lookahead = result.target;
  return {result, next};
}

double heading_error(const AnchorPose& anchor, const Point2& target) {
  const Point2 delta = target - anchor.position;
  if (delta.norm() <= 1e-12) throw DomainError("heading error undefined: target at anchor");
  const double c = std::cos(anchor.heading);
  const double s = std::sin(anchor.heading);
  // Target in the body frame, flipped when the body travels backwards.
  double along = c * delta.x() + s * delta.y();
  double left = -s * delta.x() + c * delta.y();
  if (anchor.direction == Direction::reverse) {
    along = -along;
    left = -left;
  }
  return wrap_angle(std::atan2(left, along));
}

double reverse_reference(double theta_e, double Lr, double L3) {
  return -std::atan(2.0 * L3 * std::sin(theta_e) / Lr);
}

double proportional_boost(double beta3_d, double beta3, double Kp) {
  return beta3_d + Kp * (beta3_d - beta3);
}

double forward_steering(double theta_e, double Lr, double L1) {
  const double curvature = 2.0 * std::sin(theta_e) / Lr;
  return std::atan(L1 * curvature);
}

namespace {

bool leg_finished(const PathLeg& leg, const Point2& anchor, double progress, double tolerance) {
  const Polyline line(leg.waypoints);
  const auto& s = line.vertex_arc_lengths();
  if (progress < s[s.size() - 2]) return false;
  const Point2 end = leg.waypoints.back();
  if ((anchor - end).norm() < tolerance) return true;
  const Point2 dir = (end - leg.waypoints[leg.waypoints.size() - 2]).normalized();
  return (anchor - end).dot(dir) >= 0.0;
}

}  // namespace

TrackerOutput tracker_tick(const VehicleStated& measured, const PiecewiseLinearPath& path,
                           const TrackerState& tracker, const TrackerConfig& config,
                           const VehicleParamsd& params) {
  const PathLeg& leg = path.legs.at(tracker.leg_index);
  const BodyPoses poses = derive_body_poses(measured, params);
  const Pose2& body = leg.direction == Direction::reverse ? poses.trailer : poses.truck;
  const AnchorPose anchor{body.position(), body.heading, leg.direction};

  TrackerOutput out;
  out.mode = leg.direction;
  out.beta3_ref = tracker.last_beta3_ref;
  out.alpha = tracker.last_alpha;

  auto [lookahead, next] = locate_lookahead(path, tracker, anchor.position, config.Lr);

  if (leg_finished(leg, anchor.position, next.progress, config.goal_tolerance)) {
    out.leg_completed = true;
    out.lookahead = lookahead;
    if (tracker.leg_index + 1 == static_cast<int>(path.legs.size())) {
      out.goal = true;
      out.next = next;
    } else {
      out.next = TrackerState{};
      out.next.leg_index = tracker.leg_index + 1;
      out.next.last_beta3_ref = 0.0;
      out.next.last_alpha = 0.0;
    }
    return out;
  }

  out.lookahead = lookahead;
  if ((lookahead.target - anchor.position).norm() <= 1e-9) {
    // Target coincides with the anchor: no bearing, hold the last command.
    out.next = next;
    return out;
  }
  lookahead.theta_e = heading_error(anchor, lookahead.target);
  out.lookahead.theta_e = lookahead.theta_e;
  if (leg.direction == Direction::reverse) {
    out.beta3_d = reverse_reference(lookahead.theta_e, config.Lr, params.L3);
    out.beta3_ref = proportional_boost(out.beta3_d, measured.beta3, config.Kp);
    next.last_beta3_ref = out.beta3_ref;
  } else {
    out.alpha = std::clamp(forward_steering(lookahead.theta_e, config.Lr, params.L1),
                           -params.alpha_limit, params.alpha_limit);
    next.last_alpha = out.alpha;
  }
  out.next = next;
  return out;
}

}  // namespace trailer_lab
