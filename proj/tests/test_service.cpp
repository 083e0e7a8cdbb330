#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "trailer_lab/service.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with its
// parameter names.
#include <httplib.h>

using namespace trailer_lab;
using io::Json;

namespace {

HttpResponse call(const Service& service, const std::string& method, const std::string& target,
                  const std::string& body = "") {
  return service.handle(HttpRequest{method, target, body});
}

Json body_of(const HttpResponse& r) { return Json::parse(r.body); }

std::string short_straight() {
  SimScenario s = straight_line_scenario();
  s.path = make_straight_reverse_path(1.5);
  return io::to_json(s).dump();
}

// Runs a Server on a free port for the lifetime of the object.
struct LiveServer {
  explicit LiveServer(const Service& service) : server(service, "127.0.0.1", 0) {
    thread = std::jthread([this] { server.run(); });
  }
  ~LiveServer() { server.stop(); }

  Server server;
  std::jthread thread;
};

std::vector<Json> websocket_session(std::uint16_t port, const std::string& target,
                                    const std::string& message) {
  namespace asio = boost::asio;
  namespace websocket = boost::beast::websocket;
  asio::io_context ioc;
  asio::ip::tcp::socket socket(ioc);
  socket.connect({asio::ip::make_address("127.0.0.1"), port});
  websocket::stream<asio::ip::tcp::socket> ws(std::move(socket));
  ws.handshake("127.0.0.1:" + std::to_string(port), target);
  ws.text(true);
  ws.write(asio::buffer(message));
  std::vector<Json> messages;
  for (;;) {
    boost::beast::flat_buffer buffer;
    ws.read(buffer);
    messages.push_back(Json::parse(boost::beast::buffers_to_string(buffer.data())));
    const std::string type = messages.back().at("type");
    if (type == "done" || type == "error") break;
  }
  ws.close(websocket::close_code::normal);
  return messages;
}

}  // namespace

TEST(Service, Defaults) {
  const Service service;
  const HttpResponse r = call(service, "GET", "/api/v1/defaults");
  ASSERT_EQ(r.status, 200);
  const Json j = body_of(r);
  EXPECT_EQ(j["params"]["L1"], 0.19);
  EXPECT_EQ(j["params"]["M1"], 0.036);
  EXPECT_EQ(j["rates"]["stabilizer_hz"], 100.0);
  EXPECT_EQ(j["grid_count"], 101);
  EXPECT_NEAR(j["alpha_max"].get<double>(), 0.4737644707282930, 1e-15);
  EXPECT_EQ(call(service, "GET", "/api/defaults").body, r.body);
}

TEST(Service, SimulateParkingReturnsThreeBodies) {
  const Service service;
  const HttpResponse r = call(service, "POST", "/api/v1/simulate", io::to_json(parking_scenario()).dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const Json j = body_of(r);
  EXPECT_EQ(j["status"], "goal_reached");
  const std::size_t rows = j["timing"]["rows"];
  EXPECT_EQ(j["trace"]["rows"].size(), rows);
  for (const char* body : {"trailer", "dolly", "truck"}) {
    EXPECT_EQ(j["bodies"][body].size(), rows);
    EXPECT_TRUE(j["report"][body].contains("mean_error"));
    EXPECT_FALSE(j["report"][body].contains("series"));
  }
  EXPECT_EQ(j["timing"]["stream_recommended"], false);
}

TEST(Service, RepeatRequestsAreByteIdentical) {
  const Service service;
  const std::string body = io::to_json(parking_scenario()).dump();
  const HttpResponse miss = call(service, "POST", "/api/v1/simulate", body);
  EXPECT_EQ(service.cached_schedules(), 1u);
  const HttpResponse hit = call(service, "POST", "/api/v1/simulate", body);
  EXPECT_EQ(service.cached_schedules(), 1u);
  EXPECT_EQ(miss.body, hit.body);
  EXPECT_EQ(miss.body, call(Service{}, "POST", "/api/v1/simulate", body).body);
}

TEST(Service, ValidationErrorsAre400WithField) {
  const Service service;
  Json s = io::to_json(straight_line_scenario());
  s["params"]["L2"] = -1.0;
  HttpResponse r = call(service, "POST", "/api/v1/simulate", s.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(body_of(r)["field"], "params.L2");
  EXPECT_EQ(body_of(r)["error"], "invalid_request");

  r = call(service, "POST", "/api/v1/simulate", "{not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(body_of(r)["field"], "body");

  r = call(service, "GET", "/api/v1/schedule?grid_count=4");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(body_of(r)["field"], "grid_count");
}

TEST(Service, UnprocessableAndRoutingErrors) {
  const Service service;
  Json s = io::to_json(straight_line_scenario());
  s["max_sim_time"] = 2 * kServiceMaxSimTime;
  EXPECT_EQ(call(service, "POST", "/api/v1/simulate", s.dump()).status, 422);
  Json w = Json::object();
  w["weights"] = {{"Q", {{0, 0}, {0, 0}}}, {"R", 1.0}};
  EXPECT_EQ(call(service, "POST", "/api/v1/schedule", w.dump()).status, 422);
  EXPECT_EQ(call(service, "GET", "/api/v1/simulate").status, 405);
  EXPECT_EQ(call(service, "DELETE", "/api/v1/defaults").status, 405);
  EXPECT_EQ(call(service, "GET", "/api/v1/nothing").status, 404);
  EXPECT_EQ(call(service, "GET", "/api/v1/live").status, 426);
}

TEST(Service, ScheduleEndpoint) {
  const Service service;
  const HttpResponse r = call(service, "GET", "/api/v1/schedule?grid_count=3");
  ASSERT_EQ(r.status, 200) << r.body;
  const Json j = body_of(r);
  EXPECT_EQ(j["grid"].size(), 3u);
  EXPECT_EQ(j["gains"].size(), 3u);
  EXPECT_EQ(j["grid"][1], 0.0);
}

TEST(Service, ExportSucceedsOnlyWhenGoalReached) {
  const Service service;
  const HttpResponse ok = call(service, "POST", "/api/v1/export", short_straight());
  ASSERT_EQ(ok.status, 200) << ok.body;
  const Json j = body_of(ok);
  EXPECT_EQ(j["digest"]["status"], "goal_reached");
  EXPECT_EQ(j["digest"]["trace_fnv1a64"].get<std::string>().size(), 16u);
  // Re-importing the exported scenario reproduces the digest.
  EXPECT_EQ(body_of(call(service, "POST", "/api/v1/export", j["scenario"].dump()))["digest"], j["digest"]);

  Json s = Json::parse(short_straight());
  s["max_sim_time"] = 1.0;
  const HttpResponse refused = call(service, "POST", "/api/v1/export", s.dump());
  EXPECT_EQ(refused.status, 422);
  EXPECT_EQ(body_of(refused)["error"], "infeasible");
}

TEST(Service, ValidatePathFlagsTightCorner) {
  const Service service;
  const PiecewiseLinearPath gentle{{PathLeg{
      Direction::reverse, {Point2{0, 0}, Point2{-2, 0}, Point2{-4, -0.3}}}}};
  const PiecewiseLinearPath hairpin{{PathLeg{
      Direction::reverse, {Point2{0, 0}, Point2{-2, 0}, Point2{0, -0.4}}}}};
  Json j = body_of(call(service, "POST", "/api/v1/validate-path", io::to_json(gentle).dump()));
  EXPECT_EQ(j["feasible"], true);
  // With Lr = 0.5 the pure pursuit demand stays below atan(2 L3 / Lr), inside
  // the limit; a shorter look-ahead makes the hairpin infeasible.
  j = body_of(call(service, "POST", "/api/v1/validate-path",
                   Json{{"path", io::to_json(hairpin)}}.dump()));
  EXPECT_EQ(j["feasible"], true);
  TrackerConfig tight;
  tight.Lr = 0.2;
  j = body_of(call(service, "POST", "/api/v1/validate-path",
                   Json{{"path", io::to_json(hairpin)}, {"tracker", io::to_json(tight)}}.dump()));
  EXPECT_EQ(j["feasible"], false);
  EXPECT_EQ(j["legs"][0]["corners"][0]["within_limit"], false);
  EXPECT_FALSE(j["legs"][0]["notes"].empty());
}

TEST(Service, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Service, ConcurrentRequestsAgree) {
  const Service service;
  const std::string body = short_straight();
  const std::string expected = call(Service{}, "POST", "/api/v1/simulate", body).body;
  std::vector<std::future<std::string>> results;
  for (int i = 0; i < 8; ++i)
    results.push_back(std::async(std::launch::async, [&] {
      return call(service, "POST", "/api/v1/simulate", body).body;
    }));
  for (auto& f : results) EXPECT_EQ(f.get(), expected);
  EXPECT_EQ(service.cached_schedules(), 1u);
}

TEST(Service, StaticFilesAndTraversal) {
  const auto dir = std::filesystem::temp_directory_path() / "trailer_lab_static_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<p>hi</p>";
  const Service service(ServiceOptions{dir});
  const HttpResponse index = call(service, "GET", "/");
  EXPECT_EQ(index.status, 200);
  EXPECT_EQ(index.body, "<p>hi</p>");
  EXPECT_EQ(index.content_type, "text/html; charset=utf-8");
  EXPECT_EQ(call(service, "GET", "/../etc/passwd").status, 404);
  EXPECT_EQ(call(service, "GET", "/missing.js").status, 404);
  EXPECT_EQ(call(Service{}, "GET", "/").status, 404);
  std::filesystem::remove_all(dir);
}

TEST(Service, LiveStreamMessages) {
  const Service service;
  std::vector<Json> messages;
  service.stream_live(short_straight(), [&](const std::string& m) { messages.push_back(Json::parse(m)); });
  ASSERT_GE(messages.size(), 2u);
  const Json& done = messages.back();
  EXPECT_EQ(done["type"], "done");
  EXPECT_EQ(done["status"], "goal_reached");
  std::size_t rows = 0;
  for (std::size_t i = 0; i + 1 < messages.size(); ++i) {
    EXPECT_EQ(messages[i]["type"], "rows");
    EXPECT_EQ(messages[i]["first"], rows);
    rows += messages[i]["rows"].size();
  }
  EXPECT_EQ(done["rows"], rows);
  EXPECT_EQ(messages[0]["rows"][0].size(), done["columns"].size());

  messages.clear();
  service.stream_live("{", [&](const std::string& m) { messages.push_back(Json::parse(m)); });
  ASSERT_EQ(messages.size(), 1u);
  EXPECT_EQ(messages[0]["type"], "error");
  EXPECT_EQ(messages[0]["status"], 400);
}

TEST(Server, ParseBindAddress) {
  EXPECT_EQ(parse_bind_address("127.0.0.1:8080"), std::make_pair(std::string("127.0.0.1"), std::uint16_t{8080}));
  EXPECT_EQ(parse_bind_address(":9000").second, 9000);
  EXPECT_THROW(parse_bind_address("localhost"), ValidationError);
  EXPECT_THROW(parse_bind_address("h:99999"), ValidationError);
}

TEST(Server, HttpOverSocketMatchesHandler) {
  const Service service;
  LiveServer live(service);
  httplib::Client client("127.0.0.1", live.server.port());
  auto r = client.Get("/api/v1/defaults");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, call(service, "GET", "/api/v1/defaults").body);
  EXPECT_TRUE(r->has_header("X-Elapsed-Ms"));

  r = client.Post("/api/v1/simulate", short_straight(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, call(service, "POST", "/api/v1/simulate", short_straight()).body);

  r = client.Post("/api/v1/simulate", "[1,", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST(Server, WebSocketLiveStream) {
  const Service service;
  LiveServer live(service);
  const auto messages = websocket_session(live.server.port(), "/api/v1/live", short_straight());
  ASSERT_GE(messages.size(), 2u);
  EXPECT_EQ(messages.back()["type"], "done");
  const Json batch = body_of(call(service, "POST", "/api/v1/simulate", short_straight()));
  EXPECT_EQ(messages.back()["rows"], batch["timing"]["rows"]);
  EXPECT_EQ(messages.back()["status"], batch["status"]);
}

TEST(Server, StopsWithOpenConnections) {
  const Service service;
  auto live = std::make_unique<LiveServer>(service);
  httplib::Client client("127.0.0.1", live->server.port());
  client.set_keep_alive(true);
  ASSERT_TRUE(client.Get("/api/v1/defaults"));
  const auto start = std::chrono::steady_clock::now();
  live.reset();
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}
