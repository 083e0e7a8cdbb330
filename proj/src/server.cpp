#include <chrono>
#include <list>
#include <sys/socket.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "trailer_lab/service.hpp"

namespace trailer_lab {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kBodyLimit = 16u << 20;

bool is_live_target(beast::string_view target) {
  const auto path = target.substr(0, target.find('?'));
  return path == "/api/v1/live" || path == "/api/live";
}

}  // namespace

struct Server::Impl {
  struct Connection {
    tcp::socket socket;
    std::jthread thread;
    std::atomic<bool> done{false};
    explicit Connection(tcp::socket s) : socket(std::move(s)) {}
  };

  const Service& service;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::atomic<bool> stopping{false};
  std::mutex mutex;
  std::list<Connection> connections;

  Impl(const Service& svc, const std::string& host, std::uint16_t port) : service(svc) {
    const tcp::endpoint endpoint(net::ip::make_address(host), port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  }

  void serve_live(tcp::socket& socket, http::request<http::string_body> req) {
    websocket::stream<tcp::socket&> ws(socket);
    ws.accept(req);
    beast::flat_buffer buffer;
    for (;;) {
      beast::error_code ec;
      ws.read(buffer, ec);
      if (ec) return;
      const std::string text = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());
      service.stream_live(text, [&](const std::string& message) {
        ws.text(true);
        ws.write(net::buffer(message));
      });
    }
  }

  void serve(Connection& conn) {
    beast::flat_buffer buffer;
    beast::error_code ec;
    for (;;) {
      http::request_parser<http::string_body> parser;
      parser.body_limit(kBodyLimit);
      http::read(conn.socket, buffer, parser, ec);
      if (ec == http::error::end_of_stream || ec == net::error::eof) break;
      if (ec) {
        if (ec == http::error::body_limit) {
          http::response<http::string_body> res{http::status::payload_too_large, 11};
          res.set(http::field::content_type, "application/json");
          res.body() = R"({"error":"invalid_request","message":"body too large"})";
          res.prepare_payload();
          http::write(conn.socket, res, ec);
        }
        break;
      }
      auto req = parser.release();
      if (websocket::is_upgrade(req) && is_live_target(req.target())) {
        try {
          serve_live(conn.socket, std::move(req));
        } catch (const std::exception&) {
        }
        return;
      }

      const auto started = std::chrono::steady_clock::now();
      const HttpResponse out = service.handle(
          {std::string(req.method_string()), std::string(req.target()), req.body()});
      const double elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
              .count();

      http::response<http::string_body> res{static_cast<http::status>(out.status), req.version()};
      res.set(http::field::server, "trailer-lab");
      res.set(http::field::content_type, out.content_type);
      res.set("X-Elapsed-Ms", std::to_string(elapsed_ms));
      for (const auto& [name, value] : out.headers) res.set(name, value);
      res.keep_alive(req.keep_alive());
      if (req.method() != http::verb::head) res.body() = out.body;
      res.prepare_payload();
      http::write(conn.socket, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    conn.socket.shutdown(tcp::socket::shutdown_send, ec);
  }

  void reap() {
    std::lock_guard lock(mutex);
    connections.remove_if([](const Connection& c) { return c.done.load(); });
  }
};

Server::Server(const Service& service, const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>(service, host, port)) {}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  auto& s = *impl_;
  while (!s.stopping) {
    tcp::socket socket(s.ioc);
    beast::error_code ec;
    s.acceptor.accept(socket, ec);
    if (s.stopping) break;
    if (ec) continue;
    s.reap();
    std::lock_guard lock(s.mutex);
    if (s.stopping) break;
    auto& conn = s.connections.emplace_back(std::move(socket));
    conn.thread = std::jthread([&s, &conn] {
      try {
        s.serve(conn);
      } catch (const std::exception&) {
      }
      conn.done = true;
    });
  }
}

void Server::stop() {
  auto& s = *impl_;
  if (s.stopping.exchange(true)) return;
  // Unblocks accept() and every blocking read.
  ::shutdown(s.acceptor.native_handle(), SHUT_RDWR);
  std::list<Impl::Connection> connections;
  {
    std::lock_guard lock(s.mutex);
    for (auto& c : s.connections) ::shutdown(c.socket.native_handle(), SHUT_RDWR);
    connections.splice(connections.end(), s.connections);
  }
  connections.clear();  // joins
}

}  // namespace trailer_lab
