#pragma once

// HTTP/WebSocket front end. Service maps requests to responses and holds the
// only shared state, a cache of gain schedules; Server puts it on a socket.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "trailer_lab/io.hpp"

namespace trailer_lab {

inline constexpr const char* kApiPrefix = "/api/v1";
/// Simulations longer than this are refused with 422.
inline constexpr double kServiceMaxSimTime = 3600.0;
/// Above this many rows clients are pointed at the live stream.
inline constexpr std::size_t kLiveRowThreshold = 10000;

struct HttpRequest {
  std::string method;
  std::string target;  // path plus optional query
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct ServiceOptions {
  std::optional<std::filesystem::path> static_dir;
  std::size_t schedule_cache_capacity = 64;
};

/// FNV-1a, used for result digests.
std::uint64_t fnv1a64(const std::string& data);

class Service {
 public:
  explicit Service(ServiceOptions options = {});

  /// Never throws; malformed input becomes a 4xx response.
  HttpResponse handle(const HttpRequest& request) const;

  /// Runs the scenario in `scenario_json`, calling `send` with JSON text
  /// messages: {"type":"rows",...} batches at least every `flush_period_s`
  /// of wall time, then one {"type":"done",...} or {"type":"error",...}.
  void stream_live(const std::string& scenario_json,
                   const std::function<void(const std::string&)>& send,
                   double flush_period_s = 0.05) const;

  std::shared_ptr<const GainSchedule> schedule_for(const VehicleParamsd& params,
                                                    const LqWeights& weights,
                                                    int grid_count) const;
  std::size_t cached_schedules() const;

  /// Bodies of the individual endpoints; exposed for tests.
  io::Json defaults() const;
  io::Json simulate(const io::Json& request) const;
  io::Json validate_path(const io::Json& request) const;
  io::Json schedule(const io::Json& request) const;
  io::Json export_scenario(const io::Json& request) const;

 private:
  HttpResponse serve_static(const std::string& path) const;

  ServiceOptions options_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::map<std::string, std::shared_ptr<const GainSchedule>> cache_;
};

/// Blocking thread-per-connection server. WebSocket upgrades on
/// /api/v1/live (and /api/live) go to Service::stream_live.
class Server {
 public:
  /// Binds immediately; port 0 picks a free port.
  Server(const Service& service, const std::string& host, std::uint16_t port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  /// Accepts until stop() is called.
  void run();
  /// Safe to call from any thread; returns once all connections are closed.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses "host:port" or ":port".
std::pair<std::string, std::uint16_t> parse_bind_address(const std::string& bind);

}  // namespace trailer_lab
