#include "trailer_lab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace trailer_lab::io {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

double number(const Json& j, const std::string& key, const std::string& prefix,
              std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(join(prefix, key), "missing");
  }
  const Json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(join(prefix, key), "must be a number");
  return v.get<double>();
}

void require_object(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field, "must be an object");
}

Point2 point_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(field, "must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string format_g9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

}  // namespace

Json to_json(const VehicleParamsd& p) {
  return {{"L1", p.L1}, {"L2", p.L2}, {"L3", p.L3}, {"M1", p.M1}, {"alpha_limit", p.alpha_limit}};
}

Json to_json(const LqWeights& w) {
  return {{"Q", {{w.Q(0, 0), w.Q(0, 1)}, {w.Q(1, 0), w.Q(1, 1)}}}, {"R", w.R}};
}

Json to_json(const TrackerConfig& c) {
  return {{"Lr", c.Lr}, {"Kp", c.Kp}, {"goal_tolerance", c.goal_tolerance}};
}

Json to_json(const PiecewiseLinearPath& path) {
  Json legs = Json::array();
  for (const auto& leg : path.legs) {
    Json waypoints = Json::array();
    for (const auto& p : leg.waypoints) waypoints.push_back({p.x(), p.y()});
    legs.push_back({{"direction", leg.direction == Direction::reverse ? "reverse" : "forward"},
                    {"waypoints", std::move(waypoints)}});
  }
  return {{"legs", std::move(legs)}};
}

Json to_json(const VehicleStated& s) {
  return {{"x3", s.x3}, {"y3", s.y3}, {"theta3", s.theta3}, {"beta3", s.beta3}, {"beta2", s.beta2}};
}

Json to_json(const Rates& r) {
  return {{"stabilizer_hz", r.stabilizer_hz},
          {"tracker_hz", r.tracker_hz},
          {"integrator_dt", r.integrator_dt}};
}

Json to_json(const DisturbanceConfig& d) {
  return {{"steering_backlash_halfwidth", d.steering_backlash_halfwidth},
          {"angle_noise_sigma", d.angle_noise_sigma},
          {"position_noise_sigma", d.position_noise_sigma},
          {"rng_seed", d.rng_seed}};
}

Json to_json(const SimScenario& s) {
  return {{"params", to_json(s.params)},
          {"weights", to_json(s.weights)},
          {"tracker", to_json(s.tracker)},
          {"path", to_json(s.path)},
          {"initial_state", to_json(s.initial_state)},
          {"speed", s.speed},
          {"rates", to_json(s.rates)},
          {"disturbances", to_json(s.disturbances)},
          {"max_sim_time", s.max_sim_time},
          {"grid_count", s.grid_count}};
}

Json to_json(const GainSchedule& schedule) {
  Json gains = Json::array();
  for (const auto& g : schedule.gains) gains.push_back({g(0), g(1)});
  return {{"grid", schedule.grid},
          {"gains", std::move(gains)},
          {"weights", to_json(schedule.weights)},
          {"params", to_json(schedule.params)},
          {"v_design", schedule.v_design}};
}

Json to_json(const SimulationTrace& trace) {
  Json rows = Json::array();
  for (const auto& r : trace.rows) {
    rows.push_back({r.t, r.state.x3, r.state.y3, r.state.theta3, r.state.beta3, r.state.beta2,
                    r.alpha_cmd, r.beta3_ref, r.v, r.leg_index, r.saturated ? 1 : 0,
                    r.jackknifed ? 1 : 0});
  }
  return {{"period", trace.period},
          {"columns",
           {"t", "x3", "y3", "theta3", "beta3", "beta2", "alpha_cmd", "beta3_ref", "v",
            "leg_index", "saturated", "jackknifed"}},
          {"rows", std::move(rows)}};
}

Json to_json(const BodyError& e, bool with_series) {
  Json j = {{"mean_error", e.mean}, {"max_error", e.max}};
  if (with_series) j["series"] = e.series;
  return j;
}

Json to_json(const TrackingReport& report, bool with_series) {
  Json j = {{"status", to_string(report.status)}};
  if (report.trailer) j["trailer"] = to_json(*report.trailer, with_series);
  if (report.dolly) j["dolly"] = to_json(*report.dolly, with_series);
  if (report.truck) j["truck"] = to_json(*report.truck, with_series);
  return j;
}

Json to_json(const RoAMap& map) {
  return {{"grid",
           {{"beta3_count", map.spec.beta3_count},
            {"beta2_count", map.spec.beta2_count},
            {"beta3_range", {map.spec.beta3_min, map.spec.beta3_max}},
            {"beta2_range", {map.spec.beta2_min, map.spec.beta2_max}}}},
          {"criterion",
           {{"lateral_error", map.criterion.lateral_error},
            {"angle_threshold", map.criterion.angle_threshold},
            {"hold_time", map.criterion.hold_time},
            {"time_budget", map.criterion.time_budget}}},
          {"converged_fraction", map.converged_fraction()}};
}

VehicleParamsd params_from_json(const Json& j, const std::string& field) {
  require_object(j, field);
  const VehicleParamsd defaults = test_platform_params();
  VehicleParamsd p;
  p.L1 = number(j, "L1", field, defaults.L1);
  p.L2 = number(j, "L2", field, defaults.L2);
  p.L3 = number(j, "L3", field, defaults.L3);
  p.M1 = number(j, "M1", field, defaults.M1);
  p.alpha_limit = number(j, "alpha_limit", field, defaults.alpha_limit);
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(join(field, e.field()), e.message());
  }
  return p;
}

LqWeights weights_from_json(const Json& j, const std::string& field) {
  require_object(j, field);
  LqWeights w;
  if (j.contains("Q")) {
    const Json& q = j.at("Q");
    const std::string qf = join(field, "Q");
    if (!q.is_array() || q.size() != 2 || !q[0].is_array() || !q[1].is_array() ||
        q[0].size() != 2 || q[1].size() != 2)
      throw ValidationError(qf, "must be a 2x2 array");
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        if (!q[r][c].is_number()) throw ValidationError(qf, "entries must be numbers");
        w.Q(r, c) = q[r][c].get<double>();
      }
  }
  w.R = number(j, "R", field, 1.0);
  w.validate();
  return w;
}

TrackerConfig tracker_from_json(const Json& j, const std::string& field) {
  require_object(j, field);
  TrackerConfig c;
  c.Lr = number(j, "Lr", field, c.Lr);
  c.Kp = number(j, "Kp", field, c.Kp);
  c.goal_tolerance = number(j, "goal_tolerance", field, c.goal_tolerance);
  c.validate();
  return c;
}

PiecewiseLinearPath path_from_json(const Json& j, const std::string& field) {
  require_object(j, field);
  if (!j.contains("legs") || !j.at("legs").is_array())
    throw ValidationError(join(field, "legs"), "must be an array");
  PiecewiseLinearPath path;
  const Json& legs = j.at("legs");
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const std::string lf = join(field, "legs[" + std::to_string(i) + "]");
    const Json& leg = legs[i];
    require_object(leg, lf);
    PathLeg out;
    const std::string dir = leg.value("direction", std::string{});
    if (dir == "reverse") out.direction = Direction::reverse;
    else if (dir == "forward") out.direction = Direction::forward;
    else throw ValidationError(lf + ".direction", "must be \"forward\" or \"reverse\"");
    if (!leg.contains("waypoints") || !leg.at("waypoints").is_array())
      throw ValidationError(lf + ".waypoints", "must be an array");
    const Json& wps = leg.at("waypoints");
    for (std::size_t k = 0; k < wps.size(); ++k)
      out.waypoints.push_back(point_from_json(wps[k], lf + ".waypoints[" + std::to_string(k) + "]"));
    path.legs.push_back(std::move(out));
  }
  path.validate();
  return path;
}

VehicleStated state_from_json(const Json& j, const std::string& field) {
  require_object(j, field);
  return {number(j, "x3", field, 0.0), number(j, "y3", field, 0.0),
          number(j, "theta3", field, 0.0), number(j, "beta3", field, 0.0),
          number(j, "beta2", field, 0.0)};
}

SimScenario scenario_from_json(const Json& j) {
  require_object(j, "scenario");
  SimScenario s;
  if (j.contains("params")) s.params = params_from_json(j.at("params"));
  if (j.contains("weights")) s.weights = weights_from_json(j.at("weights"));
  if (j.contains("tracker")) s.tracker = tracker_from_json(j.at("tracker"));
  if (!j.contains("path")) throw ValidationError("path", "missing");
  s.path = path_from_json(j.at("path"));
  s.initial_state = j.contains("initial_state") ? state_from_json(j.at("initial_state"))
                                                : aligned_start(s.path);
  s.speed = number(j, "speed", "", s.speed);
  if (j.contains("rates")) {
    const Json& r = j.at("rates");
    require_object(r, "rates");
    s.rates.stabilizer_hz = number(r, "stabilizer_hz", "rates", s.rates.stabilizer_hz);
    s.rates.tracker_hz = number(r, "tracker_hz", "rates", s.rates.tracker_hz);
    s.rates.integrator_dt = number(r, "integrator_dt", "rates", s.rates.integrator_dt);
  }
  if (j.contains("disturbances")) {
    const Json& d = j.at("disturbances");
    require_object(d, "disturbances");
    auto& dist = s.disturbances;
    dist.steering_backlash_halfwidth = number(d, "steering_backlash_halfwidth", "disturbances", 0.0);
    dist.angle_noise_sigma = number(d, "angle_noise_sigma", "disturbances", 0.0);
    dist.position_noise_sigma = number(d, "position_noise_sigma", "disturbances", 0.0);
    if (d.contains("rng_seed")) {
      if (!d.at("rng_seed").is_number_integer() || d.at("rng_seed").get<long long>() < 0)
        throw ValidationError("disturbances.rng_seed", "must be a non-negative integer");
      dist.rng_seed = d.at("rng_seed").get<std::uint64_t>();
    }
  }
  s.max_sim_time = number(j, "max_sim_time", "", s.max_sim_time);
  if (j.contains("grid_count")) {
    if (!j.at("grid_count").is_number_integer())
      throw ValidationError("grid_count", "must be an integer");
    s.grid_count = j.at("grid_count").get<int>();
  }
  s.validate();
  return s;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("body", std::string("invalid JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

std::string trace_csv(const SimulationTrace& trace) {
  std::string out = "t,x3,y3,theta3,beta3,beta2,alpha_cmd,beta3_ref,v,leg_index,saturated,jackknifed\n";
  out.reserve(out.size() + trace.rows.size() * 120);
  for (const auto& r : trace.rows) {
    for (const double v : {r.t, r.state.x3, r.state.y3, r.state.theta3, r.state.beta3,
                           r.state.beta2, r.alpha_cmd, r.beta3_ref, r.v}) {
      out += format_g9(v);
      out += ',';
    }
    out += std::to_string(r.leg_index);
    out += r.saturated ? ",1" : ",0";
    out += r.jackknifed ? ",1\n" : ",0\n";
  }
  return out;
}

std::string schedule_csv(const GainSchedule& schedule) {
  std::string out = "alpha_e,l_beta3,l_beta2\n";
  for (std::size_t i = 0; i < schedule.grid.size(); ++i)
    out += format_g9(schedule.grid[i]) + "," + format_g9(schedule.gains[i](0)) + "," +
           format_g9(schedule.gains[i](1)) + "\n";
  return out;
}

std::string roa_csv(const RoAMap& map) {
  std::string out = "beta3,beta2,converged\n";
  for (std::size_t i3 = 0; i3 < map.beta3_values.size(); ++i3)
    for (std::size_t i2 = 0; i2 < map.beta2_values.size(); ++i2)
      out += format_g9(map.beta3_values[i3]) + "," + format_g9(map.beta2_values[i2]) + "," +
             (map.at(static_cast<int>(i3), static_cast<int>(i2)) ? "1" : "0") + "\n";
  return out;
}

Json body_polylines(const SimulationTrace& trace) {
  Json trailer = Json::array(), dolly = Json::array(), truck = Json::array();
  for (const auto& r : trace.rows) {
    trailer.push_back({r.state.x3, r.state.y3});
    dolly.push_back({r.dolly_pose.x, r.dolly_pose.y});
    truck.push_back({r.truck_pose.x, r.truck_pose.y});
  }
  return {{"trailer", std::move(trailer)}, {"dolly", std::move(dolly)}, {"truck", std::move(truck)}};
}

}  // namespace trailer_lab::io
