// SPDX-License-Identifier: Apache-2.0
#include "panocoach/protocol.hpp"

#include <algorithm>
#include <vector>

#include "json_fields.hpp"
#include "panocoach/error.hpp"

namespace panocoach {

using namespace json_fields;

std::string_view to_string(Role::Kind kind) {
  switch (kind) {
    case Role::Kind::Coach: return "Coach";
    case Role::Kind::Player: return "Player";
    case Role::Kind::Observer: return "Observer";
  }
  return "Observer";
}

Role::Kind role_kind_from_string(std::string_view name) {
  if (name == "Coach") return Role::Kind::Coach;
  if (name == "Player") return Role::Kind::Player;
  if (name == "Observer") return Role::Kind::Observer;
  throw Error(Errc::InvalidArgument, "unknown role '" + std::string(name) + "'");
}

std::string_view kind_name(const Payload& payload) {
  return std::visit(overloaded{
                        [](const msg::Hello&) { return std::string_view("Hello"); },
                        [](const msg::Welcome&) { return std::string_view("Welcome"); },
                        [](const msg::Ping&) { return std::string_view("Ping"); },
                        [](const msg::Pong&) { return std::string_view("Pong"); },
                        [](const msg::Command&) { return std::string_view("Command"); },
                        [](const msg::Delta&) { return std::string_view("Delta"); },
                        [](const msg::SnapshotRequest&) { return std::string_view("SnapshotRequest"); },
                        [](const msg::Snapshot&) { return std::string_view("Snapshot"); },
                        [](const msg::Reject&) { return std::string_view("Reject"); },
                        [](const msg::Bye&) { return std::string_view("Bye"); },
                    },
                    payload);
}

namespace {

Json role_to_json(const Role& role) {
  Json j{{"type", to_string(role.kind)}};
  if (role.entity_id) j["entity_id"] = *role.entity_id;
  return j;
}

std::optional<EntityId> optional_entity(const Json& j) {
  const auto it = j.find("entity_id");
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed("'entity_id' must be a string");
  return it->get<std::string>();
}

Role role_from_json(const Json& j) {
  Role role;
  role.kind = named(j, "type", role_kind_from_string);
  role.entity_id = optional_entity(j);
  if ((role.kind == Role::Kind::Player) != role.entity_id.has_value()) {
    malformed("a Player role binds exactly one entity");
  }
  return role;
}

Json payload_to_json(const Payload& payload) {
  return std::visit(
      overloaded{
          [](const msg::Hello& m) {
            Json j{{"desired_role", to_string(m.desired_role)}};
            if (m.entity_id) j["entity_id"] = *m.entity_id;
            return j;
          },
          [](const msg::Welcome& m) {
            return Json{{"client_id", m.client_id},
                        {"role", role_to_json(m.role)},
                        {"snapshot", scene_to_json(m.snapshot)},
                        {"seq", m.seq}};
          },
          [](const msg::Ping& m) { return Json{{"t0", m.t0}}; },
          [](const msg::Pong& m) { return Json{{"t0", m.t0}, {"t1", m.t1}}; },
          [](const msg::Command& m) {
            return Json{{"command_id", m.command_id}, {"body", command_body_to_json(m.body)}};
          },
          [](const msg::Delta& m) { return Json{{"seq", m.seq}, {"effect", effect_to_json(m.effect)}}; },
          [](const msg::SnapshotRequest&) { return Json::object(); },
          [](const msg::Snapshot& m) { return Json{{"scene", scene_to_json(m.scene)}, {"seq", m.seq}}; },
          [](const msg::Reject& m) { return Json{{"command_id", m.command_id}, {"reason", m.reason}}; },
          [](const msg::Bye&) { return Json::object(); },
      },
      payload);
}

Payload payload_from_json(std::string_view kind, const Json& j) {
  if (!j.is_object()) malformed("payload must be an object");
  if (kind == "Hello") return msg::Hello{named(j, "desired_role", role_kind_from_string), optional_entity(j)};
  if (kind == "Welcome") {
    return msg::Welcome{get_string(j, "client_id"), role_from_json(field(j, "role")),
                        scene_from_json(field(j, "snapshot")), get_uint(j, "seq")};
  }
  if (kind == "Ping") return msg::Ping{get_int(j, "t0")};
  if (kind == "Pong") return msg::Pong{get_int(j, "t0"), get_int(j, "t1")};
  if (kind == "Command") return msg::Command{get_uint(j, "command_id"), command_body_from_json(field(j, "body"))};
  if (kind == "Delta") return msg::Delta{get_uint(j, "seq"), effect_from_json(field(j, "effect"))};
  if (kind == "SnapshotRequest") return msg::SnapshotRequest{};
  if (kind == "Snapshot") return msg::Snapshot{scene_from_json(field(j, "scene")), get_uint(j, "seq")};
  if (kind == "Reject") return msg::Reject{get_uint(j, "command_id"), get_string(j, "reason")};
  if (kind == "Bye") return msg::Bye{};
  throw Error(Errc::UnknownKind, "unknown message kind '" + std::string(kind) + "'");
}

}  // namespace

Json envelope_to_json(const Envelope& env) {
  Json j{{"kind", kind_name(env.payload)},
         {"payload", payload_to_json(env.payload)},
         {"sender", env.sender},
         {"session_time_ms", env.session_time_ms}};
  if (env.seq) j["seq"] = *env.seq;
  return j;
}

Envelope envelope_from_json(const Json& j) {
  if (!j.is_object()) malformed("envelope must be an object");
  Envelope env;
  const std::string kind = get_string(j, "kind");
  env.sender = get_string(j, "sender");
  env.session_time_ms = get_int(j, "session_time_ms");
  if (const auto it = j.find("seq"); it != j.end() && !it->is_null()) env.seq = get_uint(j, "seq");
  env.payload = payload_from_json(kind, field(j, "payload"));
  return env;
}

std::string encode_frame(const Envelope& env) {
  const std::string body = envelope_to_json(env).dump();
  if (body.size() > 0xffffffffULL) throw Error(Errc::LengthMismatch, "envelope too large to frame");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string frame;
  frame.reserve(kFrameHeaderBytes + body.size());
  frame.push_back(static_cast<char>((n >> 24) & 0xff));
  frame.push_back(static_cast<char>((n >> 16) & 0xff));
  frame.push_back(static_cast<char>((n >> 8) & 0xff));
  frame.push_back(static_cast<char>(n & 0xff));
  frame += body;
  return frame;
}

Envelope decode_frame(std::string_view frame) {
  if (frame.size() < kFrameHeaderBytes) {
    throw Error(Errc::LengthMismatch, "frame shorter than its length prefix");
  }
  const auto byte = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(frame[i])); };
  const std::uint64_t declared = (byte(0) << 24) | (byte(1) << 16) | (byte(2) << 8) | byte(3);
  const std::uint64_t actual = frame.size() - kFrameHeaderBytes;
  if (declared != actual) {
    throw Error(Errc::LengthMismatch,
                "declared " + std::to_string(declared) + " body bytes, got " + std::to_string(actual));
  }
  const std::string_view body = frame.substr(kFrameHeaderBytes, declared);
  const Json j = Json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(Errc::MalformedBody, "body is not valid structured text");
  try {
    return envelope_from_json(j);
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedBody, e.what());
  }
}

StateDelta delta_of(const Envelope& env) {
  const auto* d = std::get_if<msg::Delta>(&env.payload);
  if (d == nullptr) throw Error(Errc::MalformedBody, "envelope does not carry a delta");
  return StateDelta{d->seq, env.session_time_ms, d->effect};
}

// -- authority ----------------------------------------------------------------

Verdict authority_check(const Role& role, SessionMode mode, const CommandBody& body) {
  switch (role.kind) {
    case Role::Kind::Coach: return Verdict::allow();
    case Role::Kind::Observer: return Verdict::deny();
    case Role::Kind::Player: {
      const auto* pose = std::get_if<PlayerPose>(&body);
      if (pose == nullptr || mode == SessionMode::Lecture) return Verdict::deny();
      if (!role.entity_id || pose->id != *role.entity_id) return Verdict::deny();
      return Verdict::allow();
    }
  }
  return Verdict::deny();
}

// -- clock sync ---------------------------------------------------------------

double sample_offset(const ClockSample& s) { return s.t1 - (s.t0 + s.t2) / 2.0; }

double estimate_clock_offset(std::span<const ClockSample> samples) {
  if (samples.empty()) throw Error(Errc::InvalidArgument, "clock offset needs at least one sample");
  const std::size_t k = std::min(samples.size(), kClockWindow);
  std::vector<double> offsets;
  offsets.reserve(k);
  for (const auto& s : samples.last(k)) offsets.push_back(sample_offset(s));
  std::sort(offsets.begin(), offsets.end());
  if (k % 2 == 1) return offsets[k / 2];
  return (offsets[k / 2 - 1] + offsets[k / 2]) / 2.0;
}

void ClockSync::add(const ClockSample& sample) {
  samples_.push_back(sample);
  while (samples_.size() > kClockWindow) samples_.pop_front();
}

double ClockSync::offset_ms() const {
  const std::vector<ClockSample> window(samples_.begin(), samples_.end());
  return estimate_clock_offset(window);
}

// -- lifecycle ----------------------------------------------------------------

std::string_view to_string(SessionState::Phase phase) {
  switch (phase) {
    case SessionState::Phase::Lobby: return "Lobby";
    case SessionState::Phase::Active: return "Active";
    case SessionState::Phase::Ended: return "Ended";
  }
  return "Lobby";
}

bool SessionState::coach_connected() const {
  return std::any_of(clients.begin(), clients.end(), [](const auto& kv) {
    return kv.second.connected && kv.second.role.kind == Role::Kind::Coach;
  });
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidTransition, what); }

bool is_connected_coach(const SessionState& state, const ClientId& id) {
  const auto it = state.clients.find(id);
  return it != state.clients.end() && it->second.connected && it->second.role.kind == Role::Kind::Coach;
}

}  // namespace

SessionState session_transition(SessionState state, const SessionEvent& ev) {
  if (state.phase == SessionState::Phase::Ended) invalid("session has ended");
  std::visit(overloaded{
                 [&](const event::Join& e) {
                   if (e.role.kind == Role::Kind::Coach && state.coach_connected() &&
                       !is_connected_coach(state, e.client)) {
                     invalid("the session already has a coach");
                   }
                   state.clients.insert_or_assign(e.client, ClientInfo{e.role, true});
                 },
                 [&](const event::Leave& e) {
                   const auto it = state.clients.find(e.client);
                   if (it == state.clients.end()) invalid("unknown client '" + e.client + "'");
                   it->second.connected = false;
                 },
                 [&](const event::Start& e) {
                   if (state.phase != SessionState::Phase::Lobby) invalid("session already started");
                   if (!is_connected_coach(state, e.by)) invalid("only a connected coach can start");
                   state.phase = SessionState::Phase::Active;
                   state.mode = SessionMode::Lecture;
                 },
                 [&](const event::ModeSet& e) {
                   if (state.phase != SessionState::Phase::Active) invalid("mode changes need an active session");
                   state.mode = e.mode;
                 },
                 [&](const event::End& e) {
                   if (!is_connected_coach(state, e.by)) invalid("only the coach can end the session");
                   state.phase = SessionState::Phase::Ended;
                 },
             },
             ev);
  return state;
}

std::optional<std::string> command_gate(const SessionState& state) {
  if (state.phase != SessionState::Phase::Active) return "NotActive";
  if (!state.coach_connected()) return "NoCoach";
  return std::nullopt;
}

GapAction resolve_gap(Seq client_version, Seq incoming_seq) {
  if (incoming_seq <= client_version) return GapAction::Drop;
  if (incoming_seq == client_version + 1) return GapAction::Apply;
  return GapAction::RequestSnapshot;
}

}  // namespace panocoach
