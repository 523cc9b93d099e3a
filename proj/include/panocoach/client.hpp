// SPDX-License-Identifier: Apache-2.0
//
// Client-side scene replica. Applies deltas in seq order, recovers from gaps
// and stalls by snapshot, and estimates the session clock from Ping/Pong.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panocoach/protocol.hpp"

namespace panocoach {

struct ClientTimers {
  std::int64_t hello_retry_ms = 500;
  std::int64_t ping_interval_ms = 250;
  /// How long the server's seq hint may stay ahead before a snapshot is requested.
  std::int64_t stall_ms = 300;
  std::int64_t snapshot_retry_ms = 1000;
};

struct ClientStats {
  std::uint64_t deltas_applied = 0;
  std::uint64_t deltas_dropped = 0;
  std::uint64_t deltas_buffered = 0;
  std::uint64_t snapshots_requested = 0;
  std::uint64_t snapshots_applied = 0;
  std::uint64_t commands_sent = 0;
};

class SessionClient {
 public:
  using Send = std::function<void(std::string frame)>;

  SessionClient(Role::Kind desired_role, std::optional<EntityId> entity, Send send, ClientTimers timers = {});

  /// Sends the first Hello.
  void start(std::int64_t now_ms);
  void received(std::string_view frame, std::int64_t now_ms);
  /// Retries, pings and stall detection.
  void tick(std::int64_t now_ms);

  /// Queues a command until welcomed; returns its command id.
  CommandId submit(CommandBody body, std::int64_t now_ms);

  const TacticScene& scene() const { return scene_; }
  Seq version() const { return scene_.version; }
  bool welcomed() const { return client_id_.has_value(); }
  const std::optional<ClientId>& client_id() const { return client_id_; }
  const std::optional<Role>& role() const { return role_; }
  const std::vector<msg::Reject>& rejects() const { return rejects_; }
  bool ended() const { return ended_; }
  const ClientStats& stats() const { return stats_; }
  std::size_t queued_commands() const { return queue_.size(); }
  /// Latest seq the server has advertised.
  Seq server_seq_hint() const { return seq_hint_; }
  const ClockSync& clock() const { return clock_; }
  /// scene_hash of the replica, cached per version.
  const std::string& hash() const;

 private:
  void send(Payload payload, std::int64_t now_ms);
  void request_snapshot(std::int64_t now_ms);
  void install(TacticScene scene, std::int64_t now_ms);
  void on_delta(const Envelope& env, std::int64_t now_ms);
  void drain();
  void flush_queue(std::int64_t now_ms);

  Role::Kind desired_role_;
  std::optional<EntityId> entity_;
  Send send_;
  ClientTimers timers_;

  TacticScene scene_;
  std::optional<ClientId> client_id_;
  std::optional<Role> role_;
  std::map<Seq, StateDelta> ahead_;
  std::deque<msg::Command> queue_;
  CommandId next_command_ = 1;
  std::vector<msg::Reject> rejects_;
  bool ended_ = false;

  std::int64_t last_hello_ = 0;
  std::int64_t last_ping_ = -1;
  std::optional<std::int64_t> snapshot_requested_at_;
  Seq seq_hint_ = 0;
  std::optional<std::int64_t> behind_since_;
  ClockSync clock_;
  ClientStats stats_;

  mutable std::optional<std::pair<Seq, std::string>> hash_cache_;
};

}  // namespace panocoach
