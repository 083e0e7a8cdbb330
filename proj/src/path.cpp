#include "trailer_lab/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trailer_lab {

void PiecewiseLinearPath::validate() const {
  if (legs.empty()) throw ValidationError("path.legs", "at least one leg is required");
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const std::string field = "path.legs[" + std::to_string(i) + "]";
    const auto& wp = legs[i].waypoints;
    if (wp.size() < 2) throw ValidationError(field + ".waypoints", "needs at least 2 waypoints");
    for (std::size_t j = 0; j < wp.size(); ++j) {
      if (!wp[j].allFinite())
        throw ValidationError(field + ".waypoints[" + std::to_string(j) + "]", "not finite");
      if (j > 0 && (wp[j] - wp[j - 1]).norm() <= kMinSegmentLength)
        throw ValidationError(field + ".waypoints[" + std::to_string(j) + "]",
                              "zero-length segment");
    }
  }
}

PiecewiseLinearPath PiecewiseLinearPath::mirrored_about_x() const {
  PiecewiseLinearPath out = *this;
  for (auto& leg : out.legs)
    for (auto& p : leg.waypoints) p.y() = -p.y();
  return out;
}

Polyline::Polyline(std::vector<Point2> points) : points_(std::move(points)) {
  cumulative_.reserve(points_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i > 0) s += (points_[i] - points_[i - 1]).norm();
    cumulative_.push_back(s);
  }
}

Point2 Polyline::point_at(double arc_length) const {
  if (points_.size() == 1) return points_.front();
  const double s = std::clamp(arc_length, 0.0, length());
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t hi =
      std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), points_.size() - 1);
  const std::size_t lo = hi - 1;
  const double len = cumulative_[hi] - cumulative_[lo];
  const double t = len > 0.0 ? (s - cumulative_[lo]) / len : 0.0;
  return points_[lo] + t * (points_[hi] - points_[lo]);
}

PolylinePoint Polyline::nearest(const Point2& query, double s_min, double s_max) const {
  PolylinePoint best{points_.front(), 0.0, std::numeric_limits<double>::infinity()};
  if (points_.size() == 1) {
    best.distance = (query - points_.front()).norm();
    return best;
  }
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double s0 = cumulative_[i];
    const double s1 = cumulative_[i + 1];
    if (s1 < s_min || s0 > s_max) continue;
    const Point2 d = points_[i + 1] - points_[i];
    const double len = s1 - s0;
    const double t_min = std::max(0.0, (s_min - s0) / len);
    const double t_max = std::min(1.0, (s_max - s0) / len);
    const double t = std::clamp(d.dot(query - points_[i]) / (len * len), t_min, t_max);
    const Point2 p = points_[i] + t * d;
    const double dist = (query - p).norm();
    if (dist < best.distance) best = {p, s0 + t * len, dist};
  }
  return best;
}

std::vector<double> Polyline::circle_crossings(const Point2& center, double radius, double s_min,
                                               double s_max) const {
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double s0 = cumulative_[i];
    const double s1 = cumulative_[i + 1];
    if (s1 < s_min || s0 > s_max) continue;
    // |a + t d - c|^2 = r^2  ->  |d|^2 t^2 + 2 d.(a - c) t + |a - c|^2 - r^2 = 0
    const Point2 d = points_[i + 1] - points_[i];
    const Point2 f = points_[i] - center;
    const double qa = d.squaredNorm();
    const double qb = 2.0 * d.dot(f);
    const double qc = f.squaredNorm() - radius * radius;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    for (const double t : {(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)}) {
      if (t < 0.0 || t > 1.0) continue;
      const double s = s0 + t * (s1 - s0);
      if (s >= s_min && s <= s_max) crossings.push_back(s);
    }
  }
  std::sort(crossings.begin(), crossings.end());
  return crossings;
}

double distance_to_polyline(std::span<const Point2> points, const Point2& query) {
  if (points.empty()) return std::numeric_limits<double>::infinity();
  if (points.size() == 1) return (query - points.front()).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Point2 d = points[i + 1] - points[i];
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp(d.dot(query - points[i]) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (query - (points[i] + t * d)).norm());
  }
  return best;
}

}  // namespace trailer_lab
