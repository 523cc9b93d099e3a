// SPDX-License-Identifier: Apache-2.0
#include "panocoach/ws_server.hpp"

#include <chrono>
#include <deque>
#include <map>

#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "panocoach/codec.hpp"
#include "panocoach/error.hpp"
#include "panocoach/server.hpp"

namespace panocoach {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const std::string hex(s.substr(i + 1, 2));
      char* end = nullptr;
      const long v = std::strtol(hex.c_str(), &end, 16);
      if (end == hex.c_str() + 2) {
        out.push_back(static_cast<char>(v));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i] == '+' ? ' ' : s[i]);
  }
  return out;
}

std::optional<std::string> query_param(std::string_view query, std::string_view key) {
  std::size_t pos = 0;
  while (pos <= query.size()) {
    const std::size_t amp = std::min(query.find('&', pos), query.size());
    const std::string_view pair = query.substr(pos, amp - pos);
    const std::size_t eq = std::min(pair.find('='), pair.size());
    if (pair.substr(0, eq) == key) return percent_decode(pair.substr(std::min(eq + 1, pair.size())));
    pos = amp + 1;
  }
  return std::nullopt;
}

HttpReply json_reply(int status, const Json& body) { return {status, body.dump(), "application/json"}; }

}  // namespace

HttpHandler debug_endpoints(const SessionServer& server) {
  return [&server](std::string_view target, std::int64_t now_ms) -> std::optional<HttpReply> {
    const auto q = target.find('?');
    const std::string_view path = target.substr(0, q);
    const std::string_view query = q == std::string_view::npos ? std::string_view{} : target.substr(q + 1);
    if (path == "/debug/scene") return json_reply(200, scene_to_json(server.scene()));
    if (path == "/debug/fpv") {
      const auto entity = query_param(query, "entity");
      if (!entity || entity->empty()) return json_reply(400, {{"error", "missing entity parameter"}});
      try {
        return json_reply(200, server.fpv_reference_json(*entity, now_ms));
      } catch (const Error& e) {
        return json_reply(404, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
      }
    }
    return std::nullopt;
  };
}

struct WsServer::Impl final : Transport {
  struct Session;

  Impl(std::uint16_t port, int tick_hz)
      : acceptor(ioc),
        timer(ioc),
        period(std::max(1, 1000 / std::max(1, tick_hz))),
        start(std::chrono::steady_clock::now()) {
    beast::error_code ec;
    const tcp::endpoint endpoint(tcp::v4(), port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error(Errc::BindFailure, "port " + std::to_string(port) + ": " + ec.message());
  }

  std::int64_t now() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  }

  void send(ConnId conn, std::string frame) override;
  void close(ConnId conn) override;
  void accept();
  void schedule_tick();

  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  Host* host = nullptr;
  HttpHandler http;
  std::chrono::milliseconds period;
  std::chrono::steady_clock::time_point start;
  std::map<ConnId, std::shared_ptr<Session>> sessions;
  ConnId next_conn = 1;
};

struct WsServer::Impl::Session : std::enable_shared_from_this<Session> {
  Session(Impl& s, tcp::socket socket, ConnId conn) : server(s), id(conn), ws(std::move(socket)) {}

  void begin() {
    http::async_read(ws.next_layer(), buffer, request,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  void on_request(beast::error_code ec) {
    if (ec) return;
    if (websocket::is_upgrade(request)) {
      ws.binary(true);
      ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws.async_accept(request, [self = shared_from_this()](beast::error_code e) { self->on_accept(e); });
      return;
    }
    serve_http();
  }

  void serve_http() {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(request.version());
    res->keep_alive(false);
    std::optional<HttpReply> reply;
    if (request.method() == http::verb::get && server.http) {
      reply = server.http(std::string_view(request.target().data(), request.target().size()), server.now());
    }
    if (!reply) reply = HttpReply{404, R"({"error":"not found"})", "application/json"};
    res->result(static_cast<http::status>(reply->status));
    res->set(http::field::content_type, reply->content_type);
    res->body() = std::move(reply->body);
    res->prepare_payload();
    http::async_write(ws.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->ws.next_layer().socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  void on_accept(beast::error_code ec) {
    if (ec) {
      spdlog::debug("websocket handshake failed: {}", ec.message());
      return;
    }
    buffer.consume(buffer.size());
    server.sessions[id] = shared_from_this();
    spdlog::info("conn {} opened", id);
    server.host->connected(id, server.now());
    read();
  }

  void read() {
    ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) return finish();
    const std::string frame = beast::buffers_to_string(buffer.data());
    buffer.consume(buffer.size());
    server.host->received(id, frame, server.now());
    if (!closed) read();
  }

  void enqueue(std::string frame) {
    if (closed || closing) return;
    outbox.push_back(std::move(frame));
    if (!writing) write_next();
  }

  void write_next() {
    writing = true;
    ws.async_write(net::buffer(outbox.front()),
                   [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    writing = false;
    outbox.pop_front();
    if (ec) return finish();
    if (!outbox.empty()) return write_next();
    if (closing) shut();
  }

  void close_after_flush() {
    closing = true;
    if (!writing && outbox.empty()) shut();
  }

  void shut() {
    ws.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) { self->finish(); });
  }

  void finish() {
    if (closed) return;
    closed = true;
    server.sessions.erase(id);
    spdlog::info("conn {} closed", id);
    server.host->disconnected(id, server.now());
  }

  Impl& server;
  ConnId id;
  websocket::stream<beast::tcp_stream> ws;
  beast::flat_buffer buffer;
  http::request<http::string_body> request;
  std::deque<std::string> outbox;
  bool writing = false;
  bool closing = false;
  bool closed = false;
};

void WsServer::Impl::send(ConnId conn, std::string frame) {
  if (const auto it = sessions.find(conn); it != sessions.end()) it->second->enqueue(std::move(frame));
}

void WsServer::Impl::close(ConnId conn) {
  if (const auto it = sessions.find(conn); it != sessions.end()) it->second->close_after_flush();
}

void WsServer::Impl::accept() {
  acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Session>(*this, std::move(socket), next_conn++)->begin();
    accept();
  });
}

void WsServer::Impl::schedule_tick() {
  timer.expires_after(period);
  timer.async_wait([this](beast::error_code ec) {
    if (ec) return;
    host->tick(now());
    if (host->finished()) {
      if (acceptor.is_open()) {
        beast::error_code ignored;
        acceptor.close(ignored);
        auto open = sessions;
        for (auto& [conn, s] : open) s->close_after_flush();
      }
      if (sessions.empty()) return ioc.stop();
    }
    schedule_tick();
  });
}

WsServer::WsServer(std::uint16_t port, int tick_hz) : impl_(std::make_unique<Impl>(port, tick_hz)) {}

WsServer::~WsServer() = default;

std::uint16_t WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

Transport& WsServer::transport() { return *impl_; }

void WsServer::run(Host& host, HttpHandler http, bool handle_signals) {
  impl_->host = &host;
  impl_->http = std::move(http);
  std::optional<net::signal_set> signals;
  if (handle_signals) {
    signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code ec, int sig) {
      if (ec) return;
      spdlog::info("signal {}, shutting down", sig);
      impl_->ioc.stop();
    });
  }
  impl_->accept();
  impl_->schedule_tick();
  impl_->ioc.run();
}

void WsServer::stop() { impl_->ioc.stop(); }

}  // namespace panocoach
