#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trailer_lab/io.hpp"

namespace trailer_lab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitJackknifed = 2,
  kExitTimedOut = 3,
  kExitValidation = 4,
  kExitIo = 5,
};

inline const std::vector<std::string> kKnownOutputs = {
    "trace_csv", "trace_json", "report_json", "schedule_json", "schedule_csv", "roa_csv"};

/// Scenario plus the artifacts to write. A plain scenario file is read as a
/// manifest with default outputs.
struct RunManifest {
  SimScenario scenario;
  std::vector<std::string> outputs = {"trace_csv", "report_json"};
  std::optional<std::string> out_dir;
};

RunManifest manifest_from_json(const io::Json& j);

/// Output file name of an artifact, e.g. "trace_csv" -> "trace.csv".
std::string artifact_file_name(const std::string& artifact);

/// Reads TRAILER_LAB_LOG (trace, debug, info, warn, error, critical, off).
void configure_logging();

/// Entry point of the command-line tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trailer_lab::cli
