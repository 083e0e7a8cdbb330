#include "trailer_lab/service.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trailer_lab/riccati.hpp"

namespace trailer_lab {

using io::Json;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

Json error_body(const std::string& kind, const std::string& message,
                const std::string& field = {}) {
  Json j = {{"error", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  return j;
}

HttpResponse json_response(int status, const Json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

class Unprocessable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// "/api/v1/simulate?x=1" -> ("simulate", "x=1"); empty route when not an API path.
std::pair<std::string, std::string> split_target(const std::string& target, bool& is_api) {
  const auto q = target.find('?');
  const std::string path = target.substr(0, q);
  const std::string query = q == std::string::npos ? std::string{} : target.substr(q + 1);
  for (const std::string& prefix : {std::string(kApiPrefix) + "/", std::string("/api/")}) {
    if (path.rfind(prefix, 0) == 0) {
      is_api = true;
      return {path.substr(prefix.size()), query};
    }
  }
  is_api = path == kApiPrefix || path == "/api";
  return {path, query};
}

std::optional<std::string> query_value(const std::string& query, const std::string& key) {
  std::istringstream in(query);
  std::string item;
  while (std::getline(in, item, '&')) {
    const auto eq = item.find('=');
    if (item.substr(0, eq) == key)
      return eq == std::string::npos ? std::string{} : item.substr(eq + 1);
  }
  return std::nullopt;
}

int parse_grid_count(const std::string& text) {
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("grid_count", "must be an integer");
  }
  if (used != text.size()) throw ValidationError("grid_count", "must be an integer");
  return n;
}

SimScenario checked_scenario(const Json& request) {
  SimScenario s = io::scenario_from_json(request);
  if (s.max_sim_time > kServiceMaxSimTime)
    throw Unprocessable("max_sim_time exceeds the service limit of " +
                        std::to_string(static_cast<int>(kServiceMaxSimTime)) + " s");
  return s;
}

std::string content_type_for(const std::filesystem::path& file) {
  const std::string ext = file.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

Json row_json(const TraceRow& r) {
  return {r.t,          r.state.x3,          r.state.y3,          r.state.theta3,
          r.state.beta3, r.state.beta2,       r.alpha_cmd,         r.beta3_ref,
          r.v,          r.leg_index,          r.saturated ? 1 : 0, r.jackknifed ? 1 : 0,
          r.truck_pose.x, r.truck_pose.y,     r.dolly_pose.x,      r.dolly_pose.y};
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

std::shared_ptr<const GainSchedule> Service::schedule_for(const VehicleParamsd& params,
                                                           const LqWeights& weights,
                                                           int grid_count) const {
  const std::string key =
      Json{{"p", io::to_json(params)}, {"w", io::to_json(weights)}, {"n", grid_count}}.dump();
  {
    std::shared_lock lock(cache_mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto built = std::make_shared<const GainSchedule>(
      build_schedule(params, weights, grid_count, kDefaultDesignSpeed));
  std::unique_lock lock(cache_mutex_);
  if (cache_.size() >= options_.schedule_cache_capacity) cache_.clear();
  return cache_.emplace(key, std::move(built)).first->second;
}

std::size_t Service::cached_schedules() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

Json Service::defaults() const {
  const SimScenario s;
  return {{"params", io::to_json(s.params)},
          {"weights", io::to_json(s.weights)},
          {"tracker", io::to_json(s.tracker)},
          {"speed", s.speed},
          {"rates", io::to_json(s.rates)},
          {"disturbances", io::to_json(s.disturbances)},
          {"max_sim_time", s.max_sim_time},
          {"grid_count", s.grid_count},
          {"alpha_max", alpha_max(s.params)},
          {"live", std::string(kApiPrefix) + "/live"}};
}

Json Service::simulate(const Json& request) const {
  const SimScenario scenario = checked_scenario(request);
  const auto schedule = schedule_for(scenario.params, scenario.weights, scenario.grid_count);
  const SimResult result = trailer_lab::simulate(scenario, *schedule);
  const TrackingReport report = path_report(result, scenario.path);
  return {{"status", to_string(result.report.status)},
          {"trace", io::to_json(result.trace)},
          {"report", io::to_json(report, false)},
          {"bodies", io::body_polylines(result.trace)},
          {"timing",
           {{"rows", result.trace.rows.size()},
            {"period", result.trace.period},
            {"simulated_time", result.trace.duration()},
            {"stabilizer_hz", scenario.rates.stabilizer_hz},
            {"tracker_hz", scenario.rates.tracker_hz},
            {"integrator_dt", scenario.rates.integrator_dt},
            {"stream_recommended", result.trace.rows.size() > kLiveRowThreshold}}}};
}

Json Service::validate_path(const Json& request) const {
  if (!request.is_object()) throw ValidationError("body", "must be an object");
  const bool wrapped = request.contains("path");
  const PiecewiseLinearPath path = io::path_from_json(wrapped ? request.at("path") : request);
  VehicleParamsd params = test_platform_params();
  LqWeights weights;
  TrackerConfig tracker;
  int grid_count = kDefaultGridCount;
  if (wrapped) {
    if (request.contains("params")) params = io::params_from_json(request.at("params"));
    if (request.contains("weights")) weights = io::weights_from_json(request.at("weights"));
    if (request.contains("tracker")) tracker = io::tracker_from_json(request.at("tracker"));
    if (request.contains("grid_count")) {
      if (!request.at("grid_count").is_number_integer())
        throw ValidationError("grid_count", "must be an integer");
      grid_count = request.at("grid_count").get<int>();
    }
  }
  const auto schedule = schedule_for(params, weights, grid_count);

  bool all_feasible = true;
  Json legs = Json::array();
  for (std::size_t i = 0; i < path.legs.size(); ++i) {
    const PathLeg& leg = path.legs[i];
    const bool reverse = leg.direction == Direction::reverse;
    // Pure pursuit across a corner of turn angle phi sees a heading error of
    // up to phi / 2; the demand is the joint angle (reverse) or steering
    // angle (forward) it asks for.
    const double body_length = reverse ? params.L3 : params.L1;
    const double limit = reverse ? schedule->beta3_ref_limit() : params.alpha_limit;
    Json corners = Json::array();
    Json notes = Json::array();
    double max_demand = 0.0;
    double length = 0.0;
    for (std::size_t k = 0; k + 1 < leg.waypoints.size(); ++k) {
      const Point2 d = leg.waypoints[k + 1] - leg.waypoints[k];
      length += d.norm();
      if (d.norm() < tracker.Lr)
        notes.push_back("segment " + std::to_string(k) + " is shorter than the look-ahead distance");
      if (k == 0) continue;
      const Point2 prev = leg.waypoints[k] - leg.waypoints[k - 1];
      const double phi = std::abs(wrap_angle(std::atan2(d.y(), d.x()) - std::atan2(prev.y(), prev.x())));
      const double demand = std::atan(2.0 * body_length * std::sin(phi / 2) / tracker.Lr);
      max_demand = std::max(max_demand, demand);
      corners.push_back({{"vertex", k}, {"turn_angle", phi}, {"demand", demand},
                         {"within_limit", demand <= limit}});
      if (demand > limit)
        notes.push_back("corner at vertex " + std::to_string(k) + " demands " +
                        std::to_string(demand) + " rad, limit " + std::to_string(limit) + " rad");
    }
    const bool feasible = max_demand <= limit;
    all_feasible = all_feasible && feasible;
    legs.push_back({{"index", i},
                    {"direction", reverse ? "reverse" : "forward"},
                    {"length", length},
                    {"limit", limit},
                    {"max_demand", max_demand},
                    {"feasible", feasible},
                    {"corners", std::move(corners)},
                    {"notes", std::move(notes)}});
  }
  return {{"feasible", all_feasible}, {"legs", std::move(legs)}};
}

Json Service::schedule(const Json& request) const {
  VehicleParamsd params = test_platform_params();
  LqWeights weights;
  int grid_count = kDefaultGridCount;
  if (!request.is_null()) {
    if (!request.is_object()) throw ValidationError("body", "must be an object");
    if (request.contains("params")) params = io::params_from_json(request.at("params"));
    if (request.contains("weights")) weights = io::weights_from_json(request.at("weights"));
    if (request.contains("grid_count")) {
      if (!request.at("grid_count").is_number_integer())
        throw ValidationError("grid_count", "must be an integer");
      grid_count = request.at("grid_count").get<int>();
    }
  }
  const auto schedule = schedule_for(params, weights, grid_count);
  Json j = io::to_json(*schedule);
  j["alpha_max"] = alpha_max(params);
  j["beta3_ref_limit"] = schedule->beta3_ref_limit();
  return j;
}

Json Service::export_scenario(const Json& request) const {
  const SimScenario scenario = checked_scenario(request);
  const auto schedule = schedule_for(scenario.params, scenario.weights, scenario.grid_count);
  const SimResult result = trailer_lab::simulate(scenario, *schedule);
  if (result.report.status != Completion::goal_reached)
    throw Unprocessable("only maneuvers that reach the goal can be exported (status " +
                        to_string(result.report.status) + ")");
  return {{"scenario", io::to_json(scenario)},
          {"digest",
           {{"status", to_string(result.report.status)},
            {"rows", result.trace.rows.size()},
            {"trailer_mean_error", result.report.trailer->mean},
            {"trailer_max_error", result.report.trailer->max},
            {"trace_fnv1a64", hex64(fnv1a64(io::trace_csv(result.trace)))}}}};
}

HttpResponse Service::serve_static(const std::string& path) const {
  if (!options_.static_dir) return json_response(404, error_body("not_found", path));
  std::string rel = path.empty() || path == "/" ? "index.html" : path.substr(1);
  const std::filesystem::path relative(rel);
  for (const auto& part : relative)
    if (part == "..") return json_response(404, error_body("not_found", path));
  const std::filesystem::path file = *options_.static_dir / relative;
  std::ifstream in(file, std::ios::binary);
  if (!in || std::filesystem::is_directory(file))
    return json_response(404, error_body("not_found", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  HttpResponse r;
  r.content_type = content_type_for(file);
  r.body = buf.str();
  return r;
}

HttpResponse Service::handle(const HttpRequest& request) const {
  try {
    bool is_api = false;
    const auto [route, query] = split_target(request.target, is_api);
    const bool get = request.method == "GET" || request.method == "HEAD";
    const bool post = request.method == "POST";
    if (!is_api) {
      if (!get) return json_response(405, error_body("method_not_allowed", request.method));
      return serve_static(route);
    }

    auto body = [&] { return io::parse_json(request.body); };
    if (route == "defaults" && get) return json_response(200, defaults());
    if (route == "simulate" && post) return json_response(200, simulate(body()));
    if (route == "validate-path" && post) return json_response(200, validate_path(body()));
    if (route == "export" && post) return json_response(200, export_scenario(body()));
    if (route == "schedule" && (get || post)) {
      Json req = post ? body() : Json{};
      if (get) {
        if (const auto n = query_value(query, "grid_count"))
          req = Json{{"grid_count", parse_grid_count(*n)}};
      }
      return json_response(200, schedule(req));
    }
    if (route == "live")
      return json_response(426, error_body("upgrade_required", "connect with a WebSocket"));
    for (const char* known : {"defaults", "simulate", "validate-path", "export", "schedule"})
      if (route == known) return json_response(405, error_body("method_not_allowed", request.method));
    return json_response(404, error_body("not_found", request.target));
  } catch (const ValidationError& e) {
    return json_response(400, error_body("invalid_request", e.message(), e.field()));
  } catch (const Json::exception& e) {
    return json_response(400, error_body("invalid_request", e.what()));
  } catch (const Unprocessable& e) {
    return json_response(422, error_body("infeasible", e.what()));
  } catch (const DomainError& e) {
    return json_response(422, error_body("infeasible", e.what()));
  } catch (const RiccatiError& e) {
    return json_response(422, error_body("infeasible", e.what()));
  } catch (const std::exception& e) {
    return json_response(500, error_body("internal", e.what()));
  }
}

void Service::stream_live(const std::string& scenario_json,
                          const std::function<void(const std::string&)>& send,
                          double flush_period_s) const {
  using Clock = std::chrono::steady_clock;
  auto fail = [&](int status, const std::string& message, const std::string& field = {}) {
    Json j = error_body(status == 400 ? "invalid_request" : "infeasible", message, field);
    j["type"] = "error";
    j["status"] = status;
    send(j.dump());
  };

  SimScenario scenario;
  std::shared_ptr<const GainSchedule> schedule;
  try {
    scenario = checked_scenario(io::parse_json(scenario_json));
    schedule = schedule_for(scenario.params, scenario.weights, scenario.grid_count);
  } catch (const ValidationError& e) {
    return fail(400, e.message(), e.field());
  } catch (const Json::exception& e) {
    return fail(400, e.what());
  } catch (const std::exception& e) {
    return fail(422, e.what());
  }

  Json batch = Json::array();
  std::size_t sent = 0;
  auto last_flush = Clock::now();
  const auto period = std::chrono::duration<double>(flush_period_s);
  auto flush = [&] {
    if (batch.empty()) return;
    send(Json{{"type", "rows"}, {"first", sent}, {"rows", batch}}.dump());
    sent += batch.size();
    batch = Json::array();
    last_flush = Clock::now();
  };

  SimHooks hooks;
  hooks.on_row = [&](const TraceRow& row) {
    batch.push_back(row_json(row));
    if (batch.size() >= 5000 || Clock::now() - last_flush >= period) flush();
  };
  const SimResult result = trailer_lab::simulate(scenario, *schedule, hooks);
  flush();
  send(Json{{"type", "done"},
            {"status", to_string(result.report.status)},
            {"rows", result.trace.rows.size()},
            {"columns",
             {"t", "x3", "y3", "theta3", "beta3", "beta2", "alpha_cmd", "beta3_ref", "v",
              "leg_index", "saturated", "jackknifed", "truck_x", "truck_y", "dolly_x", "dolly_y"}},
            {"report", io::to_json(path_report(result, scenario.path), false)}}
           .dump());
}

std::pair<std::string, std::uint16_t> parse_bind_address(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ValidationError("bind", "expected host:port");
  std::string host = bind.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  const std::string port_text = bind.substr(colon + 1);
  std::size_t used = 0;
  long port = -1;
  try {
    port = std::stol(port_text, &used);
  } catch (const std::exception&) {
  }
  if (used != port_text.size() || port < 0 || port > 65535)
    throw ValidationError("bind", "port must be in [0, 65535]");
  return {host, static_cast<std::uint16_t>(port)};
}

}  // namespace trailer_lab
