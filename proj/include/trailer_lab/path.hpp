#pragma once

#include <limits>
#include <span>
#include <vector>

#include "trailer_lab/types.hpp"

namespace trailer_lab {

enum class Direction { forward, reverse };

struct PathLeg {
  Direction direction = Direction::reverse;
  std::vector<Point2> waypoints;
};

/// Ordered legs of waypoints; a leg change is a stop followed by a change of
/// travel direction.
struct PiecewiseLinearPath {
  std::vector<PathLeg> legs;

  /// Throws ValidationError on empty legs, fewer than two waypoints per leg,
  /// non-finite coordinates or zero-length segments.
  void validate() const;

  /// Mirror image about the x axis.
  PiecewiseLinearPath mirrored_about_x() const;
};

inline constexpr double kMinSegmentLength = 1e-9;

struct PolylinePoint {
  Point2 point;
  double arc_length = 0.0;  // parameter along the polyline
  double distance = 0.0;    // from the query point
};

/// Arc-length parametrized view of a waypoint list.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Point2> points);

  const std::vector<Point2>& points() const { return points_; }
  /// Cumulative arc length at each vertex.
  const std::vector<double>& vertex_arc_lengths() const { return cumulative_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::size_t segment_count() const { return points_.empty() ? 0 : points_.size() - 1; }

  Point2 point_at(double arc_length) const;

  /// Closest point with arc length in [s_min, s_max].
  PolylinePoint nearest(const Point2& query, double s_min = 0.0,
                        double s_max = std::numeric_limits<double>::infinity()) const;

  /// Circle crossings with arc length in [s_min, s_max], ascending.
  std::vector<double> circle_crossings(const Point2& center, double radius, double s_min,
                                       double s_max) const;

 private:
  std::vector<Point2> points_;
  std::vector<double> cumulative_;
};

/// Shortest distance from `query` to the polyline through `points`. A single
/// point is treated as a degenerate polyline.
double distance_to_polyline(std::span<const Point2> points, const Point2& query);

}  // namespace trailer_lab
