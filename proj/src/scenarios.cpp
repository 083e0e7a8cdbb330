#include <cmath>
#include <numbers>

#include "trailer_lab/sim.hpp"

namespace trailer_lab {

namespace {

void append_unique(std::vector<Point2>& points, const Point2& p) {
  if (points.empty() || (points.back() - p).norm() > kMinSegmentLength) points.push_back(p);
}

}  // namespace

PiecewiseLinearPath make_eight_path(double radius, double center_separation, int laps,
                                    int segments_per_lobe) {
  if (!(radius > 0)) throw ValidationError("radius", "must be > 0");
  if (!(center_separation >= 2 * radius))
    throw ValidationError("center_separation", "lobes must not overlap");
  if (laps < 1) throw ValidationError("laps", "must be >= 1");
  if (segments_per_lobe < 3) throw ValidationError("segments_per_lobe", "must be >= 3");

  // Right lobe centered at (c, 0). The straight legs are the internal common
  // tangents, crossing at the origin at +-phi from the x axis.
  const double c = center_separation / 2;
  const double phi = std::asin(std::min(1.0, radius / c));
  const Point2 center{c, 0.0};
  const Point2 tangent_dir{std::cos(phi), std::sin(phi)};
  const Point2 touch = c * std::cos(phi) * tangent_dir;

  // Clockwise around the right lobe from the upper tangent point to its
  // mirror image below the axis.
  const double start_angle = std::atan2(touch.y() - center.y(), touch.x() - center.x());
  const double sweep = 2 * start_angle;
  const double max_step = 2 * std::numbers::pi / segments_per_lobe;
  const int arc_segments = std::max(1, static_cast<int>(std::ceil(sweep / max_step - 1e-12)));

  std::vector<Point2> right_arc;
  for (int i = 0; i <= arc_segments; ++i) {
    const double a = start_angle - sweep * static_cast<double>(i) / arc_segments;
    right_arc.push_back(center + radius * Point2{std::cos(a), std::sin(a)});
  }

  std::vector<Point2> lap;
  append_unique(lap, Point2::Zero());
  for (const auto& p : right_arc) append_unique(lap, p);
  append_unique(lap, Point2::Zero());
  // Left lobe is the mirror image about the y axis, traversed counter-clockwise.
  for (const auto& p : right_arc) append_unique(lap, Point2{-p.x(), p.y()});
  append_unique(lap, Point2::Zero());

  PathLeg leg;
  leg.direction = Direction::reverse;
  for (int l = 0; l < laps; ++l)
    for (const auto& p : lap) append_unique(leg.waypoints, p);
  return PiecewiseLinearPath{{leg}};
}

PiecewiseLinearPath make_straight_reverse_path(double length) {
  if (!(length > 0)) throw ValidationError("length", "must be > 0");
  return PiecewiseLinearPath{{PathLeg{Direction::reverse, {Point2{0.0, 0.0}, Point2{-length, 0.0}}}}};
}

PiecewiseLinearPath make_parking_path() {
  // Back out of the approach lane and swing into a bay 3 m to the side.
  return PiecewiseLinearPath{{PathLeg{
      Direction::reverse,
      {Point2{0.0, 0.0}, Point2{-1.5, 0.0}, Point2{-2.7, -1.2}, Point2{-2.7, -3.2}}}}};
}

VehicleStated aligned_start(const PiecewiseLinearPath& path) {
  path.validate();
  const PathLeg& leg = path.legs.front();
  const Point2 dir = leg.waypoints[1] - leg.waypoints[0];
  double heading = std::atan2(dir.y(), dir.x());
  if (leg.direction == Direction::reverse) heading = std::atan2(-dir.y(), -dir.x());
  return {leg.waypoints[0].x(), leg.waypoints[0].y(), heading, 0.0, 0.0};
}

SimScenario straight_line_scenario() {
  SimScenario s;
  s.tracker = {0.5, 0.3, 0.02};
  s.path = make_straight_reverse_path(8.0);
  s.initial_state = {0.0, 0.3, 0.0, deg_to_rad(10.0), deg_to_rad(-10.0)};
  s.max_sim_time = 60.0;
  return s;
}

SimScenario eight_scenario(int laps) {
  SimScenario s;
  s.tracker = {0.4, 0.3, 0.02};
  s.path = make_eight_path(kEightRadius, kEightCenterSeparation, laps);
  s.initial_state = aligned_start(s.path);
  const double length = Polyline(s.path.legs.front().waypoints).length();
  s.max_sim_time = std::ceil(1.5 * length / s.speed);
  return s;
}

SimScenario parking_scenario() {
  SimScenario s;
  s.tracker = {0.5, 0.3, 0.02};
  s.path = make_parking_path();
  s.initial_state = aligned_start(s.path);
  s.max_sim_time = 60.0;
  return s;
}

}  // namespace trailer_lab
