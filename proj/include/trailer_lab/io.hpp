#pragma once

// JSON and CSV forms shared by the CLI and the HTTP service. Parsing errors
// are reported as ValidationError with a dotted field path.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "trailer_lab/lqr.hpp"
#include "trailer_lab/sim.hpp"

namespace trailer_lab::io {

using Json = nlohmann::json;

Json to_json(const VehicleParamsd& params);
Json to_json(const LqWeights& weights);
Json to_json(const TrackerConfig& config);
Json to_json(const PiecewiseLinearPath& path);
Json to_json(const VehicleStated& state);
Json to_json(const Rates& rates);
Json to_json(const DisturbanceConfig& disturbances);
Json to_json(const SimScenario& scenario);
Json to_json(const GainSchedule& schedule);
Json to_json(const SimulationTrace& trace);
Json to_json(const BodyError& error, bool with_series = true);
Json to_json(const TrackingReport& report, bool with_series = true);
Json to_json(const RoAMap& map);

VehicleParamsd params_from_json(const Json& j, const std::string& field = "params");
LqWeights weights_from_json(const Json& j, const std::string& field = "weights");
TrackerConfig tracker_from_json(const Json& j, const std::string& field = "tracker");
PiecewiseLinearPath path_from_json(const Json& j, const std::string& field = "path");
VehicleStated state_from_json(const Json& j, const std::string& field = "initial_state");
/// Missing entries take their defaults; a missing initial_state starts
/// aligned with the first path segment. The result is validated.
SimScenario scenario_from_json(const Json& j);

Json parse_json(const std::string& text);
Json read_json_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

/// `t,x3,y3,theta3,beta3,beta2,alpha_cmd,beta3_ref,v,leg_index,saturated,jackknifed`
/// with 9 significant digits.
std::string trace_csv(const SimulationTrace& trace);
/// `alpha_e,l_beta3,l_beta2`
std::string schedule_csv(const GainSchedule& schedule);
/// `beta3,beta2,converged`
std::string roa_csv(const RoAMap& map);

/// Trailer, dolly and truck polylines of a trace.
Json body_polylines(const SimulationTrace& trace);

}  // namespace trailer_lab::io
