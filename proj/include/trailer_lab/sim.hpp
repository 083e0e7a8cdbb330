#pragma once

// Multi-rate closed loop: pure pursuit at tracker_hz, LQ stabilizer at
// stabilizer_hz, RK4 integration at integrator_dt, each with zero-order hold.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trailer_lab/lqr.hpp"
#include "trailer_lab/model.hpp"
#include "trailer_lab/path.hpp"
#include "trailer_lab/poses.hpp"
#include "trailer_lab/tracker.hpp"

namespace trailer_lab {

struct Rates {
  double stabilizer_hz = 100.0;
  double tracker_hz = 10.0;
  double integrator_dt = 1e-3;

  bool operator==(const Rates&) const = default;
};

struct DisturbanceConfig {
  double steering_backlash_halfwidth = 0.0;  // [rad]
  double angle_noise_sigma = 0.0;            // on measured beta2, beta3 [rad]
  double position_noise_sigma = 0.0;         // on measured x3, y3 [m]
  std::uint64_t rng_seed = 0;

  bool operator==(const DisturbanceConfig&) const = default;
};

inline constexpr double kDefaultSpeed = 0.2;
inline const double kJackknifeAngle = deg_to_rad(85.0);

struct SimScenario {
  VehicleParamsd params = test_platform_params();
  LqWeights weights;
  TrackerConfig tracker;
  PiecewiseLinearPath path;
  VehicleStated initial_state;
  double speed = kDefaultSpeed;  // |v| [m/s]
  Rates rates;
  DisturbanceConfig disturbances;
  double max_sim_time = 300.0;
  int grid_count = kDefaultGridCount;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct TraceRow {
  double t = 0.0;
  VehicleStated state;
  double alpha_cmd = 0.0;
  double beta3_ref = 0.0;
  double v = 0.0;
  int leg_index = 0;
  Pose2 truck_pose;
  Pose2 dolly_pose;
  bool saturated = false;
  bool jackknifed = false;
};

struct SimulationTrace {
  double period = 0.01;  // 1 / stabilizer_hz
  std::vector<TraceRow> rows;

  bool empty() const { return rows.empty(); }
  double duration() const { return period * static_cast<double>(rows.size()); }
};

enum class Completion { goal_reached, jackknifed, timed_out, stopped };

std::string to_string(Completion status);

enum class Body { trailer, dolly, truck };

std::string to_string(Body body);

struct BodyError {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> series;
};

struct TrackingReport {
  std::optional<BodyError> trailer;
  std::optional<BodyError> dolly;
  std::optional<BodyError> truck;
  Completion status = Completion::timed_out;
};

struct SimResult {
  SimulationTrace trace;
  TrackingReport report;
};

struct SimHooks {
  /// Called for every recorded row.
  std::function<void(const TraceRow&)> on_row;
  /// Returning true ends the run with Completion::stopped.
  std::function<bool(const TraceRow&)> stop_when;
};

Point2 body_position(const TraceRow& row, Body body);

/// Runs the scenario with a freshly built gain schedule.
SimResult simulate(const SimScenario& scenario, const SimHooks& hooks = {});

/// Runs the scenario with a schedule built for the same params and weights.
SimResult simulate(const SimScenario& scenario, const GainSchedule& schedule,
                   const SimHooks& hooks = {});

/// Error of one body against the path (the polyline of the leg active in each
/// row) or, when given, against the same body in a reference trace.
BodyError tracking_errors(const SimulationTrace& trace, const PiecewiseLinearPath& path, Body body,
                          const SimulationTrace* reference_trace = nullptr);

/// All three bodies against the path legs active in each row.
TrackingReport path_report(const SimResult& result, const PiecewiseLinearPath& path);

/// All three bodies against a reference trace.
TrackingReport deviation_report(const SimulationTrace& trace, const SimulationTrace& reference,
                                Completion status);

// --- region of attraction -------------------------------------------------

struct RoAGridSpec {
  int beta3_count = 61;
  int beta2_count = 61;
  double beta3_min = -1.5, beta3_max = 1.5;
  double beta2_min = -1.5, beta2_max = 1.5;
};

struct RoACriterion {
  double lateral_error = 0.02;            // [m]
  double angle_threshold = deg_to_rad(3.0);
  double hold_time = 2.0;                 // [s]
  double time_budget = 60.0;              // [s]
};

struct RoAMap {
  RoAGridSpec spec;
  RoACriterion criterion;
  std::vector<double> beta3_values;
  std::vector<double> beta2_values;
  /// Row-major over beta3 (outer) then beta2.
  std::vector<std::uint8_t> converged;

  bool at(int i3, int i2) const { return converged[i3 * beta2_values.size() + i2] != 0; }
  double converged_fraction() const;
};

/// Classifies one initial (beta3, beta2) pair on the straight-line scenario.
bool converges_from(const SimScenario& base, const GainSchedule& schedule, double beta3,
                    double beta2, const RoACriterion& criterion = {});

/// threads <= 1 runs sequentially; the map is identical either way.
RoAMap region_of_attraction(const SimScenario& base, const RoAGridSpec& spec = {},
                            const RoACriterion& criterion = {}, int threads = 1);

// --- canonical scenarios --------------------------------------------------

/// Two circular lobes joined by straight segments crossing at the origin
/// (tangent lobes when center_separation == 2 * radius), as one closed
/// reverse leg repeated `laps` times.
PiecewiseLinearPath make_eight_path(double radius, double center_separation, int laps = 1,
                                    int segments_per_lobe = 16);

inline constexpr double kEightRadius = 1.0;
inline constexpr double kEightCenterSeparation = 2.0;

/// Reverse straight line from the origin along -x.
PiecewiseLinearPath make_straight_reverse_path(double length);

/// Reversing parking maneuver through two control points.
PiecewiseLinearPath make_parking_path();

/// Trailer placed on the first waypoint, aligned so its travel direction
/// follows the first segment.
VehicleStated aligned_start(const PiecewiseLinearPath& path);

SimScenario straight_line_scenario();
SimScenario eight_scenario(int laps = 5);
SimScenario parking_scenario();

}  // namespace trailer_lab
