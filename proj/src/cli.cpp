#include "trailer_lab/cli.hpp"

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "trailer_lab/riccati.hpp"
#include "trailer_lab/service.hpp"

namespace trailer_lab::cli {

using io::Json;
namespace fs = std::filesystem;

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario_file;
  std::string out_dir;
  int grid = 0;
  int parallel = 1;
  std::string bind = "127.0.0.1:8080";
  std::string static_dir;
};

Json load(const std::string& file) {
  try {
    return io::read_json_file(file);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoFailure(e.what());
  }
}

RunManifest load_manifest(const Options& opt) {
  if (opt.scenario_file.empty()) throw ValidationError("--scenario", "required");
  return manifest_from_json(load(opt.scenario_file));
}

fs::path prepare_out_dir(const std::optional<std::string>& manifest_dir, const Options& opt) {
  const fs::path dir = !opt.out_dir.empty() ? fs::path(opt.out_dir)
                       : manifest_dir       ? fs::path(*manifest_dir)
                                            : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoFailure("cannot create output directory " + dir.string());
  return dir;
}

void write(const fs::path& dir, const std::string& artifact, const std::string& text) {
  const fs::path file = dir / artifact_file_name(artifact);
  try {
    io::write_text_file(file, text);
  } catch (const std::exception& e) {
    throw IoFailure(e.what());
  }
  spdlog::info("wrote {}", file.string());
}

bool wants(const RunManifest& m, const std::string& artifact) {
  return std::find(m.outputs.begin(), m.outputs.end(), artifact) != m.outputs.end();
}

Json roa_metadata(const RoAMap& map, int threads) {
  Json j = io::to_json(map);
  j["threads"] = threads;
  return j;
}

RoAGridSpec roa_grid(int n) {
  RoAGridSpec spec;
  if (n > 0) spec.beta3_count = spec.beta2_count = n;
  return spec;
}

int exit_code_for(Completion status) {
  switch (status) {
    case Completion::goal_reached: return kExitOk;
    case Completion::jackknifed: return kExitJackknifed;
    case Completion::timed_out: return kExitTimedOut;
    case Completion::stopped: return kExitFailure;
  }
  return kExitFailure;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  RunManifest m = load_manifest(opt);
  if (opt.grid > 0) {
    m.scenario.grid_count = opt.grid;
    m.scenario.validate();
  }
  const GainSchedule schedule = build_schedule(m.scenario.params, m.scenario.weights,
                                               m.scenario.grid_count, kDefaultDesignSpeed);
  const fs::path dir = prepare_out_dir(m.out_dir, opt);
  const SimResult result = simulate(m.scenario, schedule);
  const TrackingReport report = path_report(result, m.scenario.path);

  if (wants(m, "trace_csv")) write(dir, "trace_csv", io::trace_csv(result.trace));
  if (wants(m, "trace_json")) write(dir, "trace_json", io::to_json(result.trace).dump());
  if (wants(m, "report_json")) {
    Json j = {{"status", to_string(report.status)},
              {"rows", result.trace.rows.size()},
              {"simulated_time", result.trace.duration()},
              {"report", io::to_json(report, false)}};
    write(dir, "report_json", j.dump(2) + "\n");
  }
  if (wants(m, "schedule_json")) write(dir, "schedule_json", io::to_json(schedule).dump(2) + "\n");
  if (wants(m, "schedule_csv")) write(dir, "schedule_csv", io::schedule_csv(schedule));
  if (wants(m, "roa_csv")) {
    const RoAMap map = region_of_attraction(m.scenario, roa_grid(0), {}, opt.parallel);
    write(dir, "roa_csv", io::roa_csv(map));
  }

  out << to_string(report.status) << ": " << result.trace.rows.size() << " rows, trailer mean "
      << report.trailer->mean << " m, max " << report.trailer->max << " m\n";
  return exit_code_for(report.status);
}

SimScenario optional_base(const Options& opt, SimScenario fallback) {
  if (opt.scenario_file.empty()) return fallback;
  return manifest_from_json(load(opt.scenario_file)).scenario;
}

int cmd_schedule(const Options& opt, std::ostream& out) {
  SimScenario s = optional_base(opt, straight_line_scenario());
  if (opt.grid > 0) s.grid_count = opt.grid;
  const GainSchedule schedule = build_schedule(s.params, s.weights, s.grid_count, kDefaultDesignSpeed);
  const fs::path dir = prepare_out_dir(std::nullopt, opt);
  write(dir, "schedule_json", io::to_json(schedule).dump(2) + "\n");
  write(dir, "schedule_csv", io::schedule_csv(schedule));
  out << "schedule: " << schedule.grid.size() << " points over |alpha_e| <= "
      << schedule.max_alpha_e() << " rad\n";
  return kExitOk;
}

int cmd_roa(const Options& opt, std::ostream& out) {
  const SimScenario base = optional_base(opt, straight_line_scenario());
  const RoAGridSpec spec = roa_grid(opt.grid);
  const int threads = std::max(1, opt.parallel);
  const RoAMap map = region_of_attraction(base, spec, {}, threads);
  const fs::path dir = prepare_out_dir(std::nullopt, opt);
  write(dir, "roa_csv", io::roa_csv(map));
  write(dir, "roa_json", roa_metadata(map, threads).dump(2) + "\n");
  out << "roa: " << spec.beta3_count << "x" << spec.beta2_count << " grid, converged fraction "
      << map.converged_fraction() << "\n";
  return kExitOk;
}

int cmd_serve(const Options& opt, std::ostream& out) {
  const auto [host, port] = parse_bind_address(opt.bind);
  ServiceOptions options;
  if (!opt.static_dir.empty()) {
    if (!fs::is_directory(opt.static_dir)) throw IoFailure("not a directory: " + opt.static_dir);
    options.static_dir = opt.static_dir;
  }
  const Service service(options);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Server> server;
  try {
    server = std::make_unique<Server>(service, host, port);
  } catch (const std::exception& e) {
    throw IoFailure("cannot bind " + opt.bind + ": " + e.what());
  }
  out << "listening on " << host << ":" << server->port() << std::endl;
  spdlog::info("listening on {}:{}", host, server->port());

  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}, shutting down", sig);
    server->stop();
  });
  server->run();
  // Wake the waiter if run() ended for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  return kExitOk;
}

}  // namespace

RunManifest manifest_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("manifest", "must be an object");
  RunManifest m;
  if (!j.contains("scenario")) {
    m.scenario = io::scenario_from_json(j);
    return m;
  }
  m.scenario = io::scenario_from_json(j.at("scenario"));
  if (j.contains("outputs")) {
    const Json& outputs = j.at("outputs");
    if (!outputs.is_array()) throw ValidationError("outputs", "must be an array");
    m.outputs.clear();
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const std::string field = "outputs[" + std::to_string(i) + "]";
      if (!outputs[i].is_string()) throw ValidationError(field, "must be a string");
      const std::string name = outputs[i].get<std::string>();
      if (std::find(kKnownOutputs.begin(), kKnownOutputs.end(), name) == kKnownOutputs.end())
        throw ValidationError(field, "unknown artifact \"" + name + "\"");
      m.outputs.push_back(name);
    }
  }
  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string()) throw ValidationError("out_dir", "must be a string");
    m.out_dir = j.at("out_dir").get<std::string>();
  }
  return m;
}

std::string artifact_file_name(const std::string& artifact) {
  const auto underscore = artifact.rfind('_');
  if (underscore == std::string::npos) return artifact;
  return artifact.substr(0, underscore) + "." + artifact.substr(underscore + 1);
}

void configure_logging() {
  const char* env = std::getenv("TRAILER_LAB_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Reversing simulator and gain-scheduling tools for a truck with a 2-trailer"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario or manifest");
  simulate->add_option("--scenario", opt.scenario_file, "Scenario or manifest JSON")->required();
  simulate->add_option("--out", opt.out_dir, "Output directory");
  simulate->add_option("--grid", opt.grid, "Gain schedule grid points");
  simulate->add_option("--parallel", opt.parallel, "Threads for a requested RoA map");

  auto* schedule = app.add_subcommand("schedule", "Write the gain schedule");
  schedule->add_option("--scenario", opt.scenario_file, "Scenario with params and weights");
  schedule->add_option("--out", opt.out_dir, "Output directory");
  schedule->add_option("--grid", opt.grid, "Grid points (odd)");

  auto* roa = app.add_subcommand("roa", "Map the region of attraction");
  roa->add_option("--scenario", opt.scenario_file, "Base scenario");
  roa->add_option("--out", opt.out_dir, "Output directory");
  roa->add_option("--grid", opt.grid, "Cells per axis");
  roa->add_option("--parallel", opt.parallel, "Worker threads");

  auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket service");
  serve->add_option("--bind", opt.bind, "host:port");
  serve->add_option("--static", opt.static_dir, "Directory of static assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(opt, out);
    if (*schedule) return cmd_schedule(opt, out);
    if (*roa) return cmd_roa(opt, out);
    if (*serve) return cmd_serve(opt, out);
  } catch (const ValidationError& e) {
    err << "invalid " << e.field() << ": " << e.message() << "\n";
    return kExitValidation;
  } catch (const IoFailure& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DomainError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitValidation;
  } catch (const RiccatiError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace trailer_lab::cli
