// SPDX-License-Identifier: Apache-2.0
#include "panocoach/client.hpp"

#include <spdlog/spdlog.h>

#include "panocoach/canonical.hpp"
#include "panocoach/error.hpp"

namespace panocoach {

SessionClient::SessionClient(Role::Kind desired_role, std::optional<EntityId> entity, Send send,
                             ClientTimers timers)
    : desired_role_(desired_role),
      entity_(std::move(entity)),
      send_(std::move(send)),
      timers_(timers),
      scene_(make_scene()) {}

void SessionClient::start(std::int64_t now_ms) {
  last_hello_ = now_ms;
  send(msg::Hello{desired_role_, entity_}, now_ms);
}

void SessionClient::send(Payload payload, std::int64_t now_ms) {
  const SessionMs t = clock_.ready() ? now_ms + static_cast<SessionMs>(std::llround(clock_.offset_ms())) : 0;
  send_(encode_frame(Envelope{std::nullopt, t, client_id_.value_or(""), std::move(payload)}));
}

CommandId SessionClient::submit(CommandBody body, std::int64_t now_ms) {
  const CommandId id = next_command_++;
  queue_.push_back(msg::Command{id, std::move(body)});
  if (welcomed()) flush_queue(now_ms);
  return id;
}

void SessionClient::flush_queue(std::int64_t now_ms) {
  while (!queue_.empty() && !ended_) {
    send(std::move(queue_.front()), now_ms);
    queue_.pop_front();
    ++stats_.commands_sent;
  }
}

void SessionClient::received(std::string_view frame, std::int64_t now_ms) {
  if (ended_) return;
  Envelope env;
  try {
    env = decode_frame(frame);
  } catch (const Error& e) {
    spdlog::warn("client: dropping frame: {}", e.what());
    return;
  }
  if (env.seq && *env.seq > seq_hint_) seq_hint_ = *env.seq;

  if (const auto* welcome = std::get_if<msg::Welcome>(&env.payload)) {
    if (!welcomed() || welcome->seq > scene_.version) {
      client_id_ = welcome->client_id;
      role_ = welcome->role;
      install(welcome->snapshot, now_ms);
    }
    flush_queue(now_ms);
  } else if (const auto* snap = std::get_if<msg::Snapshot>(&env.payload)) {
    if (welcomed() && snap->seq > scene_.version) install(snap->scene, now_ms);
  } else if (std::holds_alternative<msg::Delta>(env.payload)) {
    on_delta(env, now_ms);
  } else if (const auto* pong = std::get_if<msg::Pong>(&env.payload)) {
    clock_.add(ClockSample{static_cast<double>(pong->t0), static_cast<double>(pong->t1), static_cast<double>(now_ms)});
  } else if (const auto* reject = std::get_if<msg::Reject>(&env.payload)) {
    spdlog::debug("client: command {} rejected: {}", reject->command_id, reject->reason);
    rejects_.push_back(*reject);
  } else if (std::holds_alternative<msg::Bye>(env.payload)) {
    ended_ = true;
  }
  if (scene_.version >= seq_hint_) {
    behind_since_.reset();
    snapshot_requested_at_.reset();
  }
}

void SessionClient::on_delta(const Envelope& env, std::int64_t now_ms) {
  StateDelta delta = delta_of(env);
  if (!welcomed()) {
    ahead_.emplace(delta.seq, std::move(delta));
    ++stats_.deltas_buffered;
    return;
  }
  switch (resolve_gap(scene_.version, delta.seq)) {
    case GapAction::Drop:
      ++stats_.deltas_dropped;
      return;
    case GapAction::RequestSnapshot:
      // Usually reordering; the stall timer asks for a snapshot if the hole persists.
      ahead_.emplace(delta.seq, std::move(delta));
      ++stats_.deltas_buffered;
      return;
    case GapAction::Apply:
      break;
  }
  try {
    scene_ = apply_delta(std::move(scene_), delta);
    ++stats_.deltas_applied;
  } catch (const Error& e) {
    spdlog::warn("client: cannot apply delta {}: {}", delta.seq, e.what());
    request_snapshot(now_ms);
    return;
  }
  drain();
}

void SessionClient::drain() {
  while (!ahead_.empty()) {
    auto it = ahead_.begin();
    if (it->first <= scene_.version) {
      ahead_.erase(it);
      continue;
    }
    if (it->first != scene_.version + 1) return;
    try {
      scene_ = apply_delta(std::move(scene_), it->second);
      ++stats_.deltas_applied;
    } catch (const Error& e) {
      spdlog::warn("client: cannot apply buffered delta {}: {}", it->first, e.what());
      ahead_.clear();
      return;
    }
    ahead_.erase(it);
  }
}

void SessionClient::install(TacticScene scene, std::int64_t) {
  scene_ = std::move(scene);
  hash_cache_.reset();
  ++stats_.snapshots_applied;
  drain();
}

void SessionClient::request_snapshot(std::int64_t now_ms) {
  if (snapshot_requested_at_ && now_ms - *snapshot_requested_at_ < timers_.snapshot_retry_ms) return;
  snapshot_requested_at_ = now_ms;
  ++stats_.snapshots_requested;
  send(msg::SnapshotRequest{}, now_ms);
}

void SessionClient::tick(std::int64_t now_ms) {
  if (ended_) return;
  if (!welcomed()) {
    if (now_ms - last_hello_ >= timers_.hello_retry_ms) start(now_ms);
    return;
  }
  if (last_ping_ < 0 || now_ms - last_ping_ >= timers_.ping_interval_ms) {
    last_ping_ = now_ms;
    send(msg::Ping{now_ms}, now_ms);
  }
  if (seq_hint_ > scene_.version) {
    if (!behind_since_) behind_since_ = now_ms;
    if (now_ms - *behind_since_ >= timers_.stall_ms) request_snapshot(now_ms);
  } else {
    behind_since_.reset();
  }
}

const std::string& SessionClient::hash() const {
  if (!hash_cache_ || hash_cache_->first != scene_.version) hash_cache_.emplace(scene_.version, scene_hash(scene_));
  return hash_cache_->second;
}

}  // namespace panocoach
