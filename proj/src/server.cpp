// SPDX-License-Identifier: Apache-2.0
#include "panocoach/server.hpp"

#include <spdlog/spdlog.h>

#include "panocoach/error.hpp"

namespace panocoach {

namespace {

const ClientId kServerSender = "server";

Json ndc_to_json(const std::optional<NdcPoint<double>>& p) {
  if (!p) return nullptr;
  return {{"x", p->x}, {"y", p->y}, {"depth_m", p->depth_m}};
}

}  // namespace

void validate(const ServerConfig& config) {
  if (!is_valid(config.pitch)) throw Error(Errc::InvalidArgument, "pitch dimensions must be positive");
  if (config.tick_hz < 1 || config.tick_hz > 120) throw Error(Errc::InvalidArgument, "tick_hz must be in [1, 120]");
  if (!(config.v_max_mps > 0.0)) throw Error(Errc::InvalidArgument, "v_max must be positive");
  if (!(config.d_ref_m > 0.0)) throw Error(Errc::InvalidArgument, "d_ref must be positive");
}

SessionServer::SessionServer(ServerConfig config, Transport& transport, std::ostream* log)
    : config_(std::move(config)), transport_(transport), scene_(make_scene(config_.pitch)) {
  validate(config_);
  limits_.v_max_mps = config_.v_max_mps;
  if (log == nullptr && config_.record_path) {
    owned_log_ = std::make_unique<std::ofstream>(*config_.record_path, std::ios::out | std::ios::trunc);
    if (!*owned_log_) throw Error(Errc::LogWriteFailure, "cannot open " + config_.record_path->string());
    log = owned_log_.get();
  }
  if (log != nullptr) {
    log_.emplace(*log);
    log_->write_header(LogHeader{config_.pitch, utc_timestamp(), kLogFormatVersion});
  }
}

SessionMs SessionServer::session_time(std::int64_t now_ms) const {
  return active_since_ ? now_ms - *active_since_ : 0;
}

bool SessionServer::quiescent() const {
  const bool playing = scene_.sequence && scene_.sequence->playback.state == Playback::State::Playing;
  return scene_.active_plans.empty() && !playing && !sequence_dirty_ && pending_relay_.empty();
}

void SessionServer::connected(ConnId conn, std::int64_t) { connections_[conn] = Connection{}; }

void SessionServer::received(ConnId conn, std::string_view frame, std::int64_t now_ms) {
  if (finished() || !connections_.contains(conn)) return;
  Envelope env;
  try {
    env = decode_frame(frame);
  } catch (const Error& e) {
    spdlog::warn("conn {}: dropping frame: {}", conn, e.what());
    return;
  }
  const SessionMs at = session_time(now_ms);
  const auto& client = connections_[conn].client;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, msg::Hello>) {
          on_hello(conn, m, now_ms);
        } else if constexpr (std::is_same_v<T, msg::Ping>) {
          send_to(conn, msg::Pong{m.t0, at}, at, scene_.version);
        } else if constexpr (std::is_same_v<T, msg::Command>) {
          on_command(conn, m, now_ms);
        } else if constexpr (std::is_same_v<T, msg::SnapshotRequest>) {
          if (client) send_to(conn, msg::Snapshot{scene_, scene_.version}, at, scene_.version);
        } else if constexpr (std::is_same_v<T, msg::Bye>) {
          on_bye(conn, now_ms);
        } else {
          spdlog::debug("conn {}: ignoring {} from a client", conn, kind_name(env.payload));
        }
      },
      env.payload);
}

void SessionServer::disconnected(ConnId conn, std::int64_t) {
  const auto it = connections_.find(conn);
  if (it == connections_.end()) return;
  if (it->second.client && !finished()) {
    state_ = session_transition(std::move(state_), event::Leave{*it->second.client});
    spdlog::info("client {} disconnected", *it->second.client);
  }
  connections_.erase(it);
}

void SessionServer::on_hello(ConnId conn, const msg::Hello& hello, std::int64_t now_ms) {
  SessionMs at = session_time(now_ms);
  Connection& c = connections_[conn];
  if (c.client) {
    // Lost Welcome: answer again with the seat already held.
    const Role role = state_.clients.at(*c.client).role;
    send_to(conn, msg::Welcome{*c.client, role, scene_, scene_.version}, at, scene_.version);
    return;
  }

  Role role;
  switch (hello.desired_role) {
    case Role::Kind::Coach: role = Role::coach(); break;
    case Role::Kind::Observer: role = Role::observer(); break;
    case Role::Kind::Player: {
      const auto it = hello.entity_id ? scene_.entities.find(*hello.entity_id) : scene_.entities.end();
      if (it == scene_.entities.end() || it->second.kind != EntityKind::Player) {
        reject(conn, 0, "UnknownEntity", at);
        return;
      }
      role = Role::player(*hello.entity_id);
      break;
    }
  }

  const ClientId id = "c" + std::to_string(next_client_++);
  try {
    state_ = session_transition(state_, event::Join{id, role});
    if (role.kind == Role::Kind::Coach && state_.phase == SessionState::Phase::Lobby) {
      state_ = session_transition(std::move(state_), event::Start{id});
      active_since_ = now_ms;
      at = 0;
      spdlog::info("session active, coach {}", id);
    }
  } catch (const Error& e) {
    reject(conn, 0, std::string(to_string(e.code())), at);
    return;
  }
  c.client = id;
  spdlog::info("client {} joined as {}", id, to_string(role.kind));
  send_to(conn, msg::Welcome{id, role, scene_, scene_.version}, at, scene_.version);

  if (role.kind == Role::Kind::Player) {
    Entity entity = scene_.entities.at(*role.entity_id);
    if (entity.controller != Controller::player_client(id)) {
      entity.controller = Controller::player_client(id);
      commit(EntityUpsert{std::move(entity)}, at, LogRecord::Kind::Delta);
    }
  }
}

void SessionServer::on_command(ConnId conn, const msg::Command& cmd, std::int64_t now_ms) {
  const SessionMs at = session_time(now_ms);
  const auto& client = connections_[conn].client;
  if (!client) return reject(conn, cmd.command_id, "NotWelcomed", at);
  if (const auto refusal = command_gate(state_)) return reject(conn, cmd.command_id, *refusal, at);
  const Verdict verdict = authority_check(state_.clients.at(*client).role, state_.mode, cmd.body);
  if (!verdict.allowed) return reject(conn, cmd.command_id, verdict.reason, at);

  if (const auto* pose = std::get_if<PlayerPose>(&cmd.body)) {
    // Ephemeral: coalesced latest-wins and relayed on the next tick.
    if (!scene_.entities.contains(pose->id)) return reject(conn, cmd.command_id, "UnknownEntity", at);
    if (!is_valid(pose->pose)) return reject(conn, cmd.command_id, "InvalidPose", at);
    pending_relay_[pose->id] = pose->pose;
    return;
  }

  AppliedCommand applied;
  try {
    applied = apply_command(scene_, Command{cmd.command_id, *client, cmd.body}, at, limits_);
  } catch (const Error& e) {
    return reject(conn, cmd.command_id, std::string(to_string(e.code())), at);
  }
  if (!applied.changed) return;  // duplicate command id
  scene_ = std::move(applied.scene);
  if (const auto* mode = std::get_if<ModeChange>(&applied.delta.effect)) {
    state_ = session_transition(std::move(state_), event::ModeSet{mode->mode});
  }
  if (std::holds_alternative<SequenceLoad>(applied.delta.effect) ||
      std::holds_alternative<PlaybackChange>(applied.delta.effect)) {
    sequence_dirty_ = true;
  }
  if (log_) {
    try {
      log_->append(LogRecord{LogRecord::Kind::Delta, applied.delta});
    } catch (const Error& e) {
      spdlog::error("{}; ending session", e.what());
      return end_session(at);
    }
  }
  broadcast(msg::Delta{applied.delta.seq, applied.delta.effect}, at, applied.delta.seq);
}

void SessionServer::on_bye(ConnId conn, std::int64_t now_ms) {
  const auto& client = connections_[conn].client;
  if (client && state_.clients.at(*client).role.kind == Role::Kind::Coach) {
    state_ = session_transition(std::move(state_), event::End{*client});
    spdlog::info("coach {} ended the session", *client);
    end_session(session_time(now_ms));
    return;
  }
  disconnected(conn, now_ms);
  transport_.close(conn);
}

void SessionServer::tick(std::int64_t now_ms) {
  if (state_.phase != SessionState::Phase::Active) return;
  const SessionMs at = session_time(now_ms);
  if (at <= last_tick_) return;
  last_tick_ = at;

  PoseUpdate relay;
  for (auto it = pending_relay_.begin(); it != pending_relay_.end();) {
    if (!scene_.entities.contains(it->first)) {
      it = pending_relay_.erase(it);
      continue;
    }
    const auto last = last_relay_.find(it->first);
    if (last != last_relay_.end() && at - last->second < kPoseRelayIntervalMs) {
      ++it;
      continue;
    }
    relay.poses.emplace_back(it->first, it->second);
    last_relay_[it->first] = at;
    it = pending_relay_.erase(it);
  }
  if (!relay.poses.empty()) commit(std::move(relay), at, LogRecord::Kind::PoseRelay);
  if (finished()) return;

  PoseUpdate motion;
  PlanEnd ended;
  for (const auto& [id, plan] : scene_.active_plans) {
    if (at < plan.start_ms) continue;
    motion.poses.emplace_back(id, sample_motion(plan, static_cast<double>(at)));
    if (static_cast<double>(at) >= plan.end_ms()) ended.ids.push_back(id);
  }
  std::optional<Playback> finished_playback;
  if (scene_.sequence) {
    const auto& loaded = *scene_.sequence;
    const bool playing = loaded.playback.state == Playback::State::Playing;
    if (playing || sequence_dirty_) {
      const double duration = loaded.sequence.duration_ms();
      const double head = loaded.playback.playhead_at(at, duration);
      for (const auto& [id, pose] : sample_sequence(loaded.sequence, head)) {
        if (scene_.entities.contains(id)) motion.poses.emplace_back(id, pose);
      }
      if (playing && head >= duration) {
        finished_playback = loaded.playback;
        finished_playback->state = Playback::State::Paused;
        finished_playback->playhead_ms = duration;
        finished_playback->anchor_ms = at;
      }
    }
  }
  sequence_dirty_ = false;

  if (!motion.poses.empty()) commit(std::move(motion), at, LogRecord::Kind::Delta);
  if (!ended.ids.empty() && !finished()) commit(std::move(ended), at, LogRecord::Kind::Delta);
  if (finished_playback && !finished()) commit(PlaybackChange{*finished_playback}, at, LogRecord::Kind::Delta);
}

void SessionServer::commit(DeltaEffect effect, SessionMs at, LogRecord::Kind kind) {
  AppliedCommand applied = commit_effect(std::move(scene_), std::move(effect), at);
  scene_ = std::move(applied.scene);
  if (log_) {
    try {
      log_->append(LogRecord{kind, applied.delta});
    } catch (const Error& e) {
      spdlog::error("{}; ending session", e.what());
      return end_session(at);
    }
  }
  broadcast(msg::Delta{applied.delta.seq, std::move(applied.delta.effect)}, at, applied.delta.seq);
}

void SessionServer::broadcast(const Payload& payload, SessionMs at, std::optional<Seq> seq) {
  const std::string frame = encode_frame(Envelope{seq, at, kServerSender, payload});
  for (const auto& [conn, c] : connections_) {
    if (c.client) transport_.send(conn, frame);
  }
}

void SessionServer::send_to(ConnId conn, const Payload& payload, SessionMs at, std::optional<Seq> seq) {
  transport_.send(conn, encode_frame(Envelope{seq, at, kServerSender, payload}));
}

void SessionServer::reject(ConnId conn, CommandId id, const std::string& reason, SessionMs at) {
  spdlog::debug("conn {}: reject command {}: {}", conn, id, reason);
  send_to(conn, msg::Reject{id, reason}, at, std::nullopt);
}

void SessionServer::end_session(SessionMs at) {
  state_.phase = SessionState::Phase::Ended;
  broadcast(msg::Bye{}, at, std::nullopt);
  std::vector<ConnId> open;
  for (const auto& [conn, c] : connections_) open.push_back(conn);
  connections_.clear();
  for (ConnId conn : open) transport_.close(conn);
}

std::optional<ConnId> SessionServer::connection_of(const ClientId& client) const {
  for (const auto& [conn, c] : connections_) {
    if (c.client == client) return conn;
  }
  return std::nullopt;
}

Json SessionServer::fpv_reference_json(const EntityId& viewer, std::int64_t now_ms) const {
  ViewConfig view;
  view.n_max = config_.n_max;
  view.d_ref_m = config_.d_ref_m;
  const SessionMs at = session_time(now_ms);
  Json items = Json::array();
  for (const auto& item : fpv_reference(scene_, viewer, view, at)) {
    Json vertices = Json::array();
    for (const auto& v : item.vertices) vertices.push_back(ndc_to_json(v));
    items.push_back({{"id", item.id}, {"kind", item.kind}, {"size_m", item.size_m}, {"vertices", vertices}});
  }
  const CameraParams& cam = view.camera;
  return {{"entity_id", viewer},
          {"session_time_ms", at},
          {"seq", scene_.version},
          {"camera",
           {{"eye_height_m", cam.eye_height_m},
            {"hfov_rad", cam.hfov_rad},
            {"aspect", cam.aspect},
            {"near_m", cam.near_m},
            {"pitch_rad", cam.pitch_rad}}},
          {"items", std::move(items)}};
}

}  // namespace panocoach
