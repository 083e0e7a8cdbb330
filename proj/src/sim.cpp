#include "trailer_lab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace trailer_lab {

std::string to_string(Completion status) {
  switch (status) {
    case Completion::goal_reached: return "goal_reached";
    case Completion::jackknifed: return "jackknifed";
    case Completion::timed_out: return "timed_out";
    case Completion::stopped: return "stopped";
  }
  return "unknown";
}

std::string to_string(Body body) {
  switch (body) {
    case Body::trailer: return "trailer";
    case Body::dolly: return "dolly";
    case Body::truck: return "truck";
  }
  return "unknown";
}

void SimScenario::validate() const {
  try {
    params.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("params." + e.field(), e.message());
  }
  weights.validate();
  tracker.validate();
  path.validate();
  if (!initial_state.as_vector().allFinite())
    throw ValidationError("initial_state", "must be finite");
  if (!(speed > 0) || !std::isfinite(speed)) throw ValidationError("speed", "must be > 0");
  if (!(rates.tracker_hz > 0)) throw ValidationError("rates.tracker_hz", "must be > 0");
  if (!(rates.stabilizer_hz >= rates.tracker_hz))
    throw ValidationError("rates.stabilizer_hz", "must be >= tracker_hz");
  const double ratio = rates.stabilizer_hz / rates.tracker_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw ValidationError("rates.tracker_hz", "must divide stabilizer_hz");
  if (!(rates.integrator_dt > 0) || rates.integrator_dt > 1.0 / rates.stabilizer_hz * (1 + 1e-12))
    throw ValidationError("rates.integrator_dt", "must lie in (0, 1/stabilizer_hz]");
  if (!(disturbances.steering_backlash_halfwidth >= 0))
    throw ValidationError("disturbances.steering_backlash_halfwidth", "must be >= 0");
  if (!(disturbances.angle_noise_sigma >= 0))
    throw ValidationError("disturbances.angle_noise_sigma", "must be >= 0");
  if (!(disturbances.position_noise_sigma >= 0))
    throw ValidationError("disturbances.position_noise_sigma", "must be >= 0");
  if (!(max_sim_time > 0) || !std::isfinite(max_sim_time))
    throw ValidationError("max_sim_time", "must be > 0");
  if (grid_count < 3 || grid_count % 2 == 0)
    throw ValidationError("grid_count", "must be odd and >= 3");
}

Point2 body_position(const TraceRow& row, Body body) {
  switch (body) {
    case Body::trailer: return {row.state.x3, row.state.y3};
    case Body::dolly: return row.dolly_pose.position();
    case Body::truck: return row.truck_pose.position();
  }
  return {row.state.x3, row.state.y3};
}

namespace {

/// Play between the steering servo and the wheels: the output follows the
/// command only once the command leaves a band of +-halfwidth around it.
class Backlash {
 public:
  explicit Backlash(double halfwidth) : halfwidth_(halfwidth) {}

  double apply(double command) {
    if (command > output_ + halfwidth_) output_ = command - halfwidth_;
    else if (command < output_ - halfwidth_) output_ = command + halfwidth_;
    return output_;
  }

 private:
  double halfwidth_;
  double output_ = 0.0;
};

class Sensor {
 public:
  explicit Sensor(const DisturbanceConfig& config)
      : config_(config), rng_(config.rng_seed) {}

  VehicleStated measure(const VehicleStated& truth) {
    VehicleStated m = truth;
    if (config_.position_noise_sigma > 0) {
      std::normal_distribution<double> noise(0.0, config_.position_noise_sigma);
      m.x3 += noise(rng_);
      m.y3 += noise(rng_);
    }
    if (config_.angle_noise_sigma > 0) {
      std::normal_distribution<double> noise(0.0, config_.angle_noise_sigma);
      m.beta3 += noise(rng_);
      m.beta2 += noise(rng_);
    }
    return m;
  }

 private:
  DisturbanceConfig config_;
  std::mt19937_64 rng_;
};

bool is_jackknifed(const VehicleStated& s) {
  return std::abs(s.beta3) >= kJackknifeAngle || std::abs(s.beta2) >= kJackknifeAngle;
}

TraceRow make_row(double t, const VehicleStated& state, const VehicleParamsd& params) {
  TraceRow row;
  row.t = t;
  row.state = state;
  const BodyPoses poses = derive_body_poses(state, params);
  row.truck_pose = poses.truck;
  row.dolly_pose = poses.dolly;
  return row;
}

}  // namespace

SimResult simulate(const SimScenario& scenario, const SimHooks& hooks) {
  scenario.validate();
  const GainSchedule schedule = build_schedule(scenario.params, scenario.weights,
                                               scenario.grid_count, kDefaultDesignSpeed);
  return simulate(scenario, schedule, hooks);
}

SimResult simulate(const SimScenario& scenario, const GainSchedule& schedule,
                   const SimHooks& hooks) {
  scenario.validate();
  if (!(schedule.params == scenario.params) || !(schedule.weights == scenario.weights))
    throw ValidationError("schedule", "built for different params or weights");

  const auto& params = scenario.params;
  const double period = 1.0 / scenario.rates.stabilizer_hz;
  const long ticks_per_tracker =
      std::lround(scenario.rates.stabilizer_hz / scenario.rates.tracker_hz);
  const long substeps = static_cast<long>(std::ceil(period / scenario.rates.integrator_dt - 1e-9));
  const double dt = period / static_cast<double>(substeps);
  const long max_ticks = static_cast<long>(std::ceil(scenario.max_sim_time / period - 1e-9));

  SimResult result;
  result.trace.period = period;
  result.trace.rows.reserve(static_cast<std::size_t>(std::min<long>(max_ticks, 1 << 20)) + 1);

  Backlash backlash(scenario.disturbances.steering_backlash_halfwidth);
  Sensor sensor(scenario.disturbances);
  TrackerState tracker;
  VehicleStated state = scenario.initial_state.normalized();

  double beta3_ref = 0.0;
  double forward_alpha = 0.0;
  double v = 0.0;
  Completion status = Completion::timed_out;

  auto record = [&](TraceRow row) {
    result.trace.rows.push_back(row);
    if (hooks.on_row) hooks.on_row(result.trace.rows.back());
  };

  if (is_jackknifed(state)) {
    TraceRow row = make_row(0.0, state, params);
    row.jackknifed = true;
    record(row);
    result.report.status = Completion::jackknifed;
    result.report.trailer = tracking_errors(result.trace, scenario.path, Body::trailer);
    return result;
  }

  for (long k = 0; k < max_ticks; ++k) {
    const double t = static_cast<double>(k) * period;
    const VehicleStated measured = sensor.measure(state);
    bool goal = false;

    if (k % ticks_per_tracker == 0) {
      const TrackerOutput out =
          tracker_tick(measured, scenario.path, tracker, scenario.tracker, params);
      tracker = out.next;
      if (out.goal) {
        goal = true;
      } else if (out.leg_completed) {
        // Stand still for one tracker period before the direction change.
        v = 0.0;
        beta3_ref = 0.0;
        forward_alpha = 0.0;
      } else {
        v = out.mode == Direction::reverse ? -scenario.speed : scenario.speed;
        beta3_ref = out.mode == Direction::reverse ? out.beta3_ref : 0.0;
        forward_alpha = out.alpha;
      }
    }

    const Direction mode = scenario.path.legs[tracker.leg_index].direction;
    TraceRow row = make_row(t, state, params);
    row.v = goal ? 0.0 : v;
    row.beta3_ref = beta3_ref;
    row.leg_index = tracker.leg_index;
    if (mode == Direction::reverse) {
      const StabilizerOutput ctrl = stabilizing_control(measured.beta3, measured.beta2, beta3_ref,
                                                        schedule);
      row.alpha_cmd = ctrl.alpha;
      row.saturated = ctrl.saturated;
    } else {
      row.alpha_cmd = forward_alpha;
    }
    record(row);

    if (goal) {
      status = Completion::goal_reached;
      break;
    }
    if (hooks.stop_when && hooks.stop_when(result.trace.rows.back())) {
      status = Completion::stopped;
      break;
    }

    const ControlInputd input{backlash.apply(row.alpha_cmd), row.v};
    for (long i = 0; i < substeps; ++i) state = step(state, input, params, dt);

    if (is_jackknifed(state)) {
      TraceRow last = make_row(static_cast<double>(k + 1) * period, state, params);
      last.v = row.v;
      last.alpha_cmd = row.alpha_cmd;
      last.beta3_ref = row.beta3_ref;
      last.leg_index = row.leg_index;
      last.jackknifed = true;
      record(last);
      status = Completion::jackknifed;
      break;
    }
  }

  result.report.status = status;
  result.report.trailer = tracking_errors(result.trace, scenario.path, Body::trailer);
  return result;
}

BodyError tracking_errors(const SimulationTrace& trace, const PiecewiseLinearPath& path, Body body,
                          const SimulationTrace* reference_trace) {
  if (trace.empty()) throw std::invalid_argument("tracking_errors: empty trace");
  BodyError error;
  error.series.reserve(trace.rows.size());

  std::vector<Point2> reference_points;
  if (reference_trace != nullptr) {
    if (reference_trace->empty()) throw std::invalid_argument("tracking_errors: empty reference");
    reference_points.reserve(reference_trace->rows.size());
    for (const auto& row : reference_trace->rows) reference_points.push_back(body_position(row, body));
  }

  double sum = 0.0;
  for (const auto& row : trace.rows) {
    const Point2 p = body_position(row, body);
    double d = 0.0;
    if (reference_trace != nullptr) {
      d = distance_to_polyline(reference_points, p);
    } else {
      const auto& leg = path.legs.at(static_cast<std::size_t>(row.leg_index));
      d = distance_to_polyline(leg.waypoints, p);
    }
    error.series.push_back(d);
    sum += d;
    error.max = std::max(error.max, d);
  }
  error.mean = sum / static_cast<double>(trace.rows.size());
  return error;
}

TrackingReport path_report(const SimResult& result, const PiecewiseLinearPath& path) {
  TrackingReport report = result.report;
  report.trailer = tracking_errors(result.trace, path, Body::trailer);
  report.dolly = tracking_errors(result.trace, path, Body::dolly);
  report.truck = tracking_errors(result.trace, path, Body::truck);
  return report;
}

TrackingReport deviation_report(const SimulationTrace& trace, const SimulationTrace& reference,
                                Completion status) {
  TrackingReport report;
  report.status = status;
  report.trailer = tracking_errors(trace, {}, Body::trailer, &reference);
  report.dolly = tracking_errors(trace, {}, Body::dolly, &reference);
  report.truck = tracking_errors(trace, {}, Body::truck, &reference);
  return report;
}

}  // namespace trailer_lab
