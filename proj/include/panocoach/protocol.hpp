// SPDX-License-Identifier: Apache-2.0
//
// Wire protocol: envelopes, framing, roles and the authority matrix, session
// lifecycle, gap handling and clock offset estimation.
//
// Frame layout: 4-byte big-endian body length, then a compact text body with
// sorted keys:
//   {"kind":"Delta","payload":{...},"sender":"server","seq":12,"session_time_ms":3400}
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "panocoach/codec.hpp"
#include "panocoach/scene.hpp"

namespace panocoach {

struct Role {
  enum class Kind { Coach, Player, Observer };
  Kind kind = Kind::Observer;
  std::optional<EntityId> entity_id;  ///< Player only

  static Role coach() { return {Kind::Coach, std::nullopt}; }
  static Role player(EntityId id) { return {Kind::Player, std::move(id)}; }
  static Role observer() { return {Kind::Observer, std::nullopt}; }
  bool operator==(const Role&) const = default;
};

std::string_view to_string(Role::Kind kind);
Role::Kind role_kind_from_string(std::string_view name);

namespace msg {

struct Hello {
  Role::Kind desired_role = Role::Kind::Observer;
  std::optional<EntityId> entity_id;
  bool operator==(const Hello&) const = default;
};
struct Welcome {
  ClientId client_id;
  Role role;
  TacticScene snapshot;
  Seq seq = 0;
  bool operator==(const Welcome&) const = default;
};
struct Ping {
  std::int64_t t0 = 0;
  bool operator==(const Ping&) const = default;
};
struct Pong {
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;
  bool operator==(const Pong&) const = default;
};
struct Command {
  CommandId command_id = 0;
  CommandBody body;
  bool operator==(const Command&) const = default;
};
struct Delta {
  Seq seq = 0;
  DeltaEffect effect;
  bool operator==(const Delta&) const = default;
};
struct SnapshotRequest {
  bool operator==(const SnapshotRequest&) const = default;
};
struct Snapshot {
  TacticScene scene;
  Seq seq = 0;
  bool operator==(const Snapshot&) const = default;
};
struct Reject {
  CommandId command_id = 0;
  std::string reason;
  bool operator==(const Reject&) const = default;
};
struct Bye {
  bool operator==(const Bye&) const = default;
};

}  // namespace msg

using Payload = std::variant<msg::Hello, msg::Welcome, msg::Ping, msg::Pong, msg::Command, msg::Delta,
                             msg::SnapshotRequest, msg::Snapshot, msg::Reject, msg::Bye>;

std::string_view kind_name(const Payload& payload);

struct Envelope {
  std::optional<Seq> seq;
  SessionMs session_time_ms = 0;
  ClientId sender;
  Payload payload;
  bool operator==(const Envelope&) const = default;
};

inline constexpr std::size_t kFrameHeaderBytes = 4;

Json envelope_to_json(const Envelope& env);
Envelope envelope_from_json(const Json& j);

std::string encode_frame(const Envelope& env);

/// Throws Error with LengthMismatch, MalformedBody or UnknownKind. Never reads
/// past the declared length.
Envelope decode_frame(std::string_view frame);

/// Rebuilds the StateDelta carried by a Delta envelope.
StateDelta delta_of(const Envelope& env);

// -- authority --------------------------------------------------------------

struct Verdict {
  bool allowed = false;
  std::string reason;  ///< "AuthorityError" when denied

  static Verdict allow() { return {true, {}}; }
  static Verdict deny() { return {false, "AuthorityError"}; }
  bool operator==(const Verdict&) const = default;
};

Verdict authority_check(const Role& role, SessionMode mode, const CommandBody& body);

// -- clock sync -------------------------------------------------------------

struct ClockSample {
  double t0 = 0.0;  ///< client send, client clock
  double t1 = 0.0;  ///< server reply, session clock
  double t2 = 0.0;  ///< client receive, client clock
};

inline constexpr std::size_t kClockWindow = 9;

double sample_offset(const ClockSample& s);

/// Median of the per-sample offsets over the most recent kClockWindow samples.
/// Session time = local time + offset.
double estimate_clock_offset(std::span<const ClockSample> samples);

/// Rolling window feeding estimate_clock_offset.
class ClockSync {
 public:
  void add(const ClockSample& sample);
  bool ready() const { return !samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  double offset_ms() const;

 private:
  std::deque<ClockSample> samples_;
};

// -- session lifecycle ------------------------------------------------------

struct ClientInfo {
  Role role;
  bool connected = true;
  bool operator==(const ClientInfo&) const = default;
};

struct SessionState {
  enum class Phase { Lobby, Active, Ended };
  Phase phase = Phase::Lobby;
  SessionMode mode = SessionMode::Lecture;
  std::map<ClientId, ClientInfo> clients;
  Seq version = 0;

  bool coach_connected() const;
  bool operator==(const SessionState&) const = default;
};

std::string_view to_string(SessionState::Phase phase);

namespace event {
struct Join {
  ClientId client;
  Role role;
};
struct Leave {
  ClientId client;
};
struct Start {
  ClientId by;
};
struct ModeSet {
  SessionMode mode;
};
struct End {
  ClientId by;
};
}  // namespace event

using SessionEvent = std::variant<event::Join, event::Leave, event::Start, event::ModeSet, event::End>;

/// Throws Error(InvalidTransition) for events the current state cannot take.
SessionState session_transition(SessionState state, const SessionEvent& ev);

/// Reason a command must be refused regardless of role ("NotActive",
/// "NoCoach"), or nullopt when the session accepts commands.
std::optional<std::string> command_gate(const SessionState& state);

enum class GapAction { Apply, Drop, RequestSnapshot };

GapAction resolve_gap(Seq client_version, Seq incoming_seq);

}  // namespace panocoach
