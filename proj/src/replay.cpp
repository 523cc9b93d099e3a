// SPDX-License-Identifier: Apache-2.0
#include "panocoach/replay.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "panocoach/error.hpp"

namespace panocoach {

namespace {

const ClientId kReplaySender = "replay";

}  // namespace

ReplayHost::ReplayHost(SessionLog log, double rate, Transport& transport)
    : log_(std::move(log)), transport_(transport), rate_(rate), scene_(make_scene(log_.header.pitch)) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(Errc::InvalidArgument, "replay rate must be > 0");
}

double ReplayHost::position_ms(std::int64_t now_ms) const {
  if (!playing_ || !anchor_now_) return anchor_position_;
  return anchor_position_ + static_cast<double>(now_ms - *anchor_now_) * rate_;
}

void ReplayHost::connected(ConnId conn, std::int64_t now_ms) {
  if (!anchor_now_) anchor_now_ = now_ms;
  connections_[conn] = Connection{};
}

void ReplayHost::disconnected(ConnId conn, std::int64_t) {
  const auto it = connections_.find(conn);
  if (it == connections_.end()) return;
  if (it->second.operator_) operator_seated_ = false;
  connections_.erase(it);
}

void ReplayHost::received(ConnId conn, std::string_view frame, std::int64_t now_ms) {
  if (!connections_.contains(conn)) return;
  Envelope env;
  try {
    env = decode_frame(frame);
  } catch (const Error& e) {
    spdlog::warn("replay conn {}: dropping frame: {}", conn, e.what());
    return;
  }
  Connection& c = connections_[conn];
  if (const auto* hello = std::get_if<msg::Hello>(&env.payload)) {
    if (!c.client) {
      c.client = "c" + std::to_string(next_client_++);
      if (hello->desired_role == Role::Kind::Coach && !operator_seated_) {
        c.operator_ = true;
        operator_seated_ = true;
        spdlog::info("replay operator {} connected", *c.client);
      }
    }
    const Role role = c.operator_ ? Role::coach() : Role::observer();
    send_to(conn, msg::Welcome{*c.client, role, scene_, scene_.version}, scene_.version);
  } else if (const auto* ping = std::get_if<msg::Ping>(&env.payload)) {
    send_to(conn, msg::Pong{ping->t0, static_cast<std::int64_t>(std::floor(position_ms(now_ms)))}, scene_.version);
  } else if (std::holds_alternative<msg::SnapshotRequest>(env.payload)) {
    if (c.client) send_to(conn, msg::Snapshot{scene_, scene_.version}, scene_.version);
  } else if (const auto* cmd = std::get_if<msg::Command>(&env.payload)) {
    on_control(conn, *cmd, now_ms);
  } else if (std::holds_alternative<msg::Bye>(env.payload)) {
    disconnected(conn, now_ms);
    transport_.close(conn);
  }
}

void ReplayHost::on_control(ConnId conn, const msg::Command& cmd, std::int64_t now_ms) {
  const Connection& c = connections_[conn];
  const auto* pc = std::get_if<PlaybackControl>(&cmd.body);
  if (!c.client) return send_to(conn, msg::Reject{cmd.command_id, "NotWelcomed"}, std::nullopt);
  if (!c.operator_ || pc == nullptr) return send_to(conn, msg::Reject{cmd.command_id, "AuthorityError"}, std::nullopt);

  const double here = position_ms(now_ms);
  switch (pc->action) {
    case PlaybackControl::Action::Play:
      if (!(pc->rate > 0.0) || !std::isfinite(pc->rate)) {
        return send_to(conn, msg::Reject{cmd.command_id, "InvalidArgument"}, std::nullopt);
      }
      anchor_position_ = here;
      anchor_now_ = now_ms;
      rate_ = pc->rate;
      playing_ = true;
      break;
    case PlaybackControl::Action::Pause:
      anchor_position_ = here;
      anchor_now_ = now_ms;
      playing_ = false;
      break;
    case PlaybackControl::Action::Seek:
      if (!(pc->position_ms >= 0.0) || !std::isfinite(pc->position_ms)) {
        return send_to(conn, msg::Reject{cmd.command_id, "InvalidArgument"}, std::nullopt);
      }
      rebuild(pc->position_ms, now_ms);
      break;
    case PlaybackControl::Action::Stop:
      playing_ = false;
      rebuild(0.0, now_ms);
      break;
  }
  tick(now_ms);
}

void ReplayHost::rebuild(double position, std::int64_t now_ms) {
  std::size_t count = 0;
  while (count < log_.records.size() && static_cast<double>(log_.records[count].delta.session_time_ms) <= position) {
    ++count;
  }
  const Seq served = scene_.version + 1;
  scene_ = replay_scene(log_, count);
  scene_.version = served;
  cursor_ = count;
  anchor_position_ = position;
  anchor_now_ = now_ms;
  broadcast(msg::Snapshot{scene_, served}, served, static_cast<SessionMs>(position));
}

void ReplayHost::tick(std::int64_t now_ms) {
  if (!anchor_now_) anchor_now_ = now_ms;
  const double position = position_ms(now_ms);
  while (cursor_ < log_.records.size() &&
         static_cast<double>(log_.records[cursor_].delta.session_time_ms) <= position) {
    const StateDelta& recorded = log_.records[cursor_].delta;
    const StateDelta served{scene_.version + 1, recorded.session_time_ms, recorded.effect};
    scene_ = apply_delta(std::move(scene_), served);
    ++cursor_;
    broadcast(msg::Delta{served.seq, served.effect}, served.seq, served.session_time_ms);
  }
}

void ReplayHost::send_to(ConnId conn, const Payload& payload, std::optional<Seq> seq) {
  transport_.send(conn, encode_frame(Envelope{seq, static_cast<SessionMs>(anchor_position_), kReplaySender, payload}));
}

void ReplayHost::broadcast(const Payload& payload, std::optional<Seq> seq, SessionMs at) {
  const std::string frame = encode_frame(Envelope{seq, at, kReplaySender, payload});
  for (const auto& [conn, c] : connections_) {
    if (c.client) transport_.send(conn, frame);
  }
}

}  // namespace panocoach
