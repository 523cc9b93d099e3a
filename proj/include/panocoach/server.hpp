// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>

#include "panocoach/host.hpp"
#include "panocoach/protocol.hpp"
#include "panocoach/session_log.hpp"
#include "panocoach/views.hpp"

namespace panocoach {

struct ServerConfig {
  std::uint16_t port = 8080;
  PitchSpec pitch;
  std::optional<std::filesystem::path> record_path;
  double v_max_mps = 8.0;
  std::size_t n_max = 5;
  double d_ref_m = 15.0;
  int tick_hz = 30;
};

/// Throws Error(InvalidArgument) for out-of-range values.
void validate(const ServerConfig& config);

/// Minimum spacing of relayed poses per entity.
inline constexpr std::int64_t kPoseRelayIntervalMs = 100;

/// The authoritative session loop. Single-threaded: every call must come from
/// the loop that owns it.
class SessionServer final : public Host {
 public:
  /// Records to `log` when given, else to config.record_path when set.
  SessionServer(ServerConfig config, Transport& transport, std::ostream* log = nullptr);

  void connected(ConnId conn, std::int64_t now_ms) override;
  void received(ConnId conn, std::string_view frame, std::int64_t now_ms) override;
  void disconnected(ConnId conn, std::int64_t now_ms) override;
  void tick(std::int64_t now_ms) override;
  bool finished() const override { return state_.phase == SessionState::Phase::Ended; }

  const TacticScene& scene() const { return scene_; }
  const SessionState& state() const { return state_; }
  const ServerConfig& config() const { return config_; }
  SessionMs session_time(std::int64_t now_ms) const;

  /// True when ticking would emit nothing: no running plans, no playing or
  /// unsynced sequence, no pending pose relays.
  bool quiescent() const;

  /// Frame for the board UI's FPV preview check.
  Json fpv_reference_json(const EntityId& viewer, std::int64_t now_ms) const;

 private:
  struct Connection {
    std::optional<ClientId> client;
  };

  void on_hello(ConnId conn, const msg::Hello& hello, std::int64_t now_ms);
  void on_command(ConnId conn, const msg::Command& cmd, std::int64_t now_ms);
  void on_bye(ConnId conn, std::int64_t now_ms);
  void commit(DeltaEffect effect, SessionMs at, LogRecord::Kind kind);
  void broadcast(const Payload& payload, SessionMs at, std::optional<Seq> seq);
  void send_to(ConnId conn, const Payload& payload, SessionMs at, std::optional<Seq> seq);
  void reject(ConnId conn, CommandId id, const std::string& reason, SessionMs at);
  void end_session(SessionMs at);
  std::optional<ConnId> connection_of(const ClientId& client) const;

  ServerConfig config_;
  Transport& transport_;
  std::unique_ptr<std::ofstream> owned_log_;
  std::optional<SessionLogWriter> log_;
  MotionLimits limits_;

  TacticScene scene_;
  SessionState state_;
  std::map<ConnId, Connection> connections_;
  std::uint64_t next_client_ = 1;
  std::optional<std::int64_t> active_since_;
  SessionMs last_tick_ = -1;

  std::map<EntityId, Pose> pending_relay_;
  std::map<EntityId, SessionMs> last_relay_;
  bool sequence_dirty_ = false;
};

}  // namespace panocoach
