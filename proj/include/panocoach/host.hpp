// SPDX-License-Identifier: Apache-2.0
//
// Seam between session logic and whatever moves bytes: the WebSocket server
// and the network simulator both implement Transport and drive a Host.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace panocoach {

using ConnId = std::uint64_t;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(ConnId conn, std::string frame) = 0;
  virtual void close(ConnId conn) = 0;
};

/// A session loop. Times are the host's monotonic clock in milliseconds and
/// never decrease between calls.
class Host {
 public:
  virtual ~Host() = default;
  virtual void connected(ConnId conn, std::int64_t now_ms) = 0;
  virtual void received(ConnId conn, std::string_view frame, std::int64_t now_ms) = 0;
  virtual void disconnected(ConnId conn, std::int64_t now_ms) = 0;
  virtual void tick(std::int64_t now_ms) = 0;
  virtual bool finished() const = 0;
};

}  // namespace panocoach
