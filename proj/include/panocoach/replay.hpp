// SPDX-License-Identifier: Apache-2.0
//
// Serve mode for recorded sessions: a read-only session that re-broadcasts a
// log's records at session_time / rate. Every client is an Observer except one
// Coach-authenticated operator, who may only send PlaybackControl.
#pragma once

#include <map>
#include <optional>

#include "panocoach/host.hpp"
#include "panocoach/protocol.hpp"
#include "panocoach/session_log.hpp"

namespace panocoach {

class ReplayHost final : public Host {
 public:
  /// Throws Error(InvalidArgument) unless rate > 0.
  ReplayHost(SessionLog log, double rate, Transport& transport);

  void connected(ConnId conn, std::int64_t now_ms) override;
  void received(ConnId conn, std::string_view frame, std::int64_t now_ms) override;
  void disconnected(ConnId conn, std::int64_t now_ms) override;
  void tick(std::int64_t now_ms) override;
  bool finished() const override { return false; }

  /// Replay position in recorded session time.
  double position_ms(std::int64_t now_ms) const;
  bool playing() const { return playing_; }
  double rate() const { return rate_; }
  /// Records applied so far.
  std::size_t cursor() const { return cursor_; }
  /// Served scene; its version counts everything sent, including seeks.
  const TacticScene& scene() const { return scene_; }
  const SessionLog& log() const { return log_; }

 private:
  struct Connection {
    std::optional<ClientId> client;
    bool operator_ = false;
  };

  void on_control(ConnId conn, const msg::Command& cmd, std::int64_t now_ms);
  void rebuild(double position_ms, std::int64_t now_ms);
  void send_to(ConnId conn, const Payload& payload, std::optional<Seq> seq);
  void broadcast(const Payload& payload, std::optional<Seq> seq, SessionMs at);

  SessionLog log_;
  Transport& transport_;
  double rate_;
  bool playing_ = true;
  std::optional<std::int64_t> anchor_now_;
  double anchor_position_ = 0.0;
  std::size_t cursor_ = 0;
  TacticScene scene_;
  std::map<ConnId, Connection> connections_;
  std::uint64_t next_client_ = 1;
  bool operator_seated_ = false;
};

}  // namespace panocoach
