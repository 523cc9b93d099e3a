// SPDX-License-Identifier: Apache-2.0
//
// WebSocket transport for a Host. Binary frames carry one length-prefixed
// envelope each. Plain HTTP GETs on the same port go to an optional handler.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "panocoach/host.hpp"

namespace panocoach {

class SessionServer;

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using HttpHandler = std::function<std::optional<HttpReply>(std::string_view target, std::int64_t now_ms)>;

/// GET /debug/scene and GET /debug/fpv?entity=<id> for a live session.
HttpHandler debug_endpoints(const SessionServer& server);

class WsServer {
 public:
  /// Binds immediately; throws Error(BindFailure). Port 0 picks a free port.
  WsServer(std::uint16_t port, int tick_hz);
  ~WsServer();
  WsServer(const WsServer&) = delete;
  WsServer& operator=(const WsServer&) = delete;

  std::uint16_t port() const;
  /// What the host sends through; valid for the server's lifetime.
  Transport& transport();
  /// Serves until stop(), SIGINT/SIGTERM when enabled, or the host finishes.
  void run(Host& host, HttpHandler http = {}, bool handle_signals = false);
  /// Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace panocoach
