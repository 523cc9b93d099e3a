// SPDX-License-Identifier: Apache-2.0
#include "panocoach/scene.hpp"

#include <algorithm>
#include <cmath>

#include "panocoach/error.hpp"

namespace panocoach {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad_name(std::string_view what, std::string_view name) {
  throw Error(Errc::InvalidArgument, "unknown " + std::string(what) + " '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::Lecture: return "Lecture";
    case SessionMode::Rehearsal: return "Rehearsal";
    case SessionMode::Review: return "Review";
  }
  return "Lecture";
}

SessionMode session_mode_from_string(std::string_view name) {
  if (name == "Lecture") return SessionMode::Lecture;
  if (name == "Rehearsal") return SessionMode::Rehearsal;
  if (name == "Review") return SessionMode::Review;
  bad_name("mode", name);
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Player: return "Player";
    case EntityKind::Ball: return "Ball";
    case EntityKind::Cone: return "Cone";
  }
  return "Player";
}

EntityKind entity_kind_from_string(std::string_view name) {
  if (name == "Player") return EntityKind::Player;
  if (name == "Ball") return EntityKind::Ball;
  if (name == "Cone") return EntityKind::Cone;
  bad_name("entity kind", name);
}

std::string_view to_string(Team team) { return team == Team::Home ? "Home" : "Away"; }

Team team_from_string(std::string_view name) {
  if (name == "Home") return Team::Home;
  if (name == "Away") return Team::Away;
  bad_name("team", name);
}

std::string_view to_string(Playback::State state) {
  switch (state) {
    case Playback::State::Stopped: return "Stopped";
    case Playback::State::Playing: return "Playing";
    case Playback::State::Paused: return "Paused";
  }
  return "Stopped";
}

Playback::State playback_state_from_string(std::string_view name) {
  if (name == "Stopped") return Playback::State::Stopped;
  if (name == "Playing") return Playback::State::Playing;
  if (name == "Paused") return Playback::State::Paused;
  bad_name("playback state", name);
}

std::string_view to_string(PlaybackControl::Action action) {
  switch (action) {
    case PlaybackControl::Action::Play: return "play";
    case PlaybackControl::Action::Pause: return "pause";
    case PlaybackControl::Action::Seek: return "seek";
    case PlaybackControl::Action::Stop: return "stop";
  }
  return "play";
}

PlaybackControl::Action playback_action_from_string(std::string_view name) {
  if (name == "play") return PlaybackControl::Action::Play;
  if (name == "pause") return PlaybackControl::Action::Pause;
  if (name == "seek") return PlaybackControl::Action::Seek;
  if (name == "stop") return PlaybackControl::Action::Stop;
  bad_name("playback action", name);
}

std::string_view command_name(const CommandBody& body) {
  return std::visit(overloaded{
                        [](const SpawnEntity&) { return std::string_view("SpawnEntity"); },
                        [](const RemoveEntity&) { return std::string_view("RemoveEntity"); },
                        [](const TeleportEntity&) { return std::string_view("TeleportEntity"); },
                        [](const RetargetEntity&) { return std::string_view("RetargetEntity"); },
                        [](const AddAnnotation&) { return std::string_view("AddAnnotation"); },
                        [](const RemoveAnnotation&) { return std::string_view("RemoveAnnotation"); },
                        [](const SetMode&) { return std::string_view("SetMode"); },
                        [](const LoadSequence&) { return std::string_view("LoadSequence"); },
                        [](const PlaybackControl&) { return std::string_view("PlaybackControl"); },
                        [](const PlayerPose&) { return std::string_view("PlayerPose"); },
                    },
                    body);
}

std::string_view effect_name(const DeltaEffect& effect) {
  return std::visit(overloaded{
                        [](const EntityUpsert&) { return std::string_view("EntityUpsert"); },
                        [](const EntityRemove&) { return std::string_view("EntityRemove"); },
                        [](const AnnotationUpsert&) { return std::string_view("AnnotationUpsert"); },
                        [](const AnnotationRemove&) { return std::string_view("AnnotationRemove"); },
                        [](const ModeChange&) { return std::string_view("ModeChange"); },
                        [](const PlanStart&) { return std::string_view("PlanStart"); },
                        [](const PlanEnd&) { return std::string_view("PlanEnd"); },
                        [](const SequenceLoad&) { return std::string_view("SequenceLoad"); },
                        [](const PlaybackChange&) { return std::string_view("PlaybackChange"); },
                        [](const PoseUpdate&) { return std::string_view("PoseUpdate"); },
                    },
                    effect);
}

// -- validation ---------------------------------------------------------------

namespace {

double cross(const GroundPoint& o, const GroundPoint& a, const GroundPoint& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

int orientation(const GroundPoint& o, const GroundPoint& a, const GroundPoint& b) {
  const double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

bool on_segment(const GroundPoint& a, const GroundPoint& b, const GroundPoint& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const GroundPoint& p1, const GroundPoint& p2, const GroundPoint& q1,
                        const GroundPoint& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool ground_ok(const GroundPoint& p, const PitchSpec& pitch) {
  return within_pitch(pitch, p.x(), p.y(), kPitchMarginM);
}

bool world_ok(const WorldPoint& p, const PitchSpec& pitch) {
  return within_pitch(pitch, p.x(), p.y(), kPitchMarginM) && std::isfinite(p.z()) && p.z() >= 0.0;
}

}  // namespace

bool is_simple_polygon(const std::vector<GroundPoint>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (polygon[i] == polygon[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a1 = polygon[i];
    const auto& a2 = polygon[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b1 = polygon[j];
      const auto& b2 = polygon[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_intersect(a1, a2, b1, b2)) return false;
        continue;
      }
      // Adjacent edges may only share their common vertex: reject folding back
      // along the same line.
      const GroundPoint& shared = (j == i + 1) ? a2 : a1;
      const GroundPoint& a_other = (j == i + 1) ? a1 : a2;
      const GroundPoint& b_other = (j == i + 1) ? b2 : b1;
      if (orientation(shared, a_other, b_other) == 0) {
        const GroundPoint da = a_other - shared;
        const GroundPoint db = b_other - shared;
        if (da.dot(db) > 0.0) return false;
      }
    }
  }
  return true;
}

bool is_valid(const Annotation& annotation, const PitchSpec& pitch) {
  if (annotation.id.empty() || annotation.priority < 0) return false;
  return std::visit(
      overloaded{
          [&](const Polyline& s) {
            return s.points.size() >= 2 &&
                   std::all_of(s.points.begin(), s.points.end(),
                               [&](const GroundPoint& p) { return ground_ok(p, pitch); });
          },
          [&](const Arrow2D& s) { return ground_ok(s.from, pitch) && ground_ok(s.to, pitch); },
          [&](const Arrow3D& s) { return world_ok(s.from, pitch) && world_ok(s.to, pitch); },
          [&](const Zone& s) {
            return std::all_of(s.polygon.begin(), s.polygon.end(),
                               [&](const GroundPoint& p) { return ground_ok(p, pitch); }) &&
                   is_simple_polygon(s.polygon);
          },
          [&](const Marker& s) { return ground_ok(s.at, pitch); },
      },
      annotation.shape);
}

bool is_valid(const Entity& entity) {
  if (entity.id.empty() || !is_valid(entity.pose)) return false;
  if (!std::isfinite(entity.height_m) || !std::isfinite(entity.speed_mps)) return false;
  if (entity.kind == EntityKind::Player) return entity.height_m > 0.0;
  return entity.controller.is_coach();
}

// -- scene --------------------------------------------------------------------

double Playback::playhead_at(SessionMs now_ms, double duration_ms) const {
  double head = playhead_ms;
  if (state == State::Playing) head += static_cast<double>(now_ms - anchor_ms) * rate;
  return std::clamp(head, 0.0, std::max(0.0, duration_ms));
}

AnticipationCue anticipation_cue(const MotionPlan& plan, SessionMs created_ms) {
  return {plan.to, {plan.from, plan.to}, created_ms, plan.end_ms()};
}

bool TacticScene::operator==(const TacticScene& other) const {
  return pitch == other.pitch && entities == other.entities && annotations == other.annotations &&
         mode == other.mode && active_plans == other.active_plans && sequence == other.sequence &&
         version == other.version;
}

TacticScene make_scene(const PitchSpec& pitch) {
  if (!is_valid(pitch)) throw Error(Errc::InvalidArgument, "pitch dimensions must be positive");
  TacticScene scene;
  scene.pitch = pitch;
  return scene;
}

namespace {

void apply_effect(TacticScene& scene, const DeltaEffect& effect) {
  std::visit(
      overloaded{
          [&](const EntityUpsert& e) {
            scene.entities.insert_or_assign(e.entity.id, e.entity);
            scene.active_plans.erase(e.entity.id);
          },
          [&](const EntityRemove& e) {
            scene.entities.erase(e.id);
            scene.active_plans.erase(e.id);
          },
          [&](const AnnotationUpsert& e) {
            scene.annotations.insert_or_assign(e.annotation.id, e.annotation);
          },
          [&](const AnnotationRemove& e) { scene.annotations.erase(e.id); },
          [&](const ModeChange& e) { scene.mode = e.mode; },
          [&](const PlanStart& e) {
            if (scene.entities.contains(e.plan.entity_id)) {
              scene.active_plans.insert_or_assign(e.plan.entity_id, e.plan);
            }
          },
          [&](const PlanEnd& e) {
            for (const auto& id : e.ids) scene.active_plans.erase(id);
          },
          [&](const SequenceLoad& e) { scene.sequence = LoadedSequence{e.sequence, Playback{}}; },
          [&](const PlaybackChange& e) {
            if (!scene.sequence) return;
            scene.sequence->playback = e.playback;
            if (e.playback.state == Playback::State::Playing) {
              for (const auto& [id, track] : scene.sequence->sequence.tracks) {
                scene.active_plans.erase(id);
              }
            }
          },
          [&](const PoseUpdate& e) {
            for (const auto& [id, pose] : e.poses) {
              if (auto it = scene.entities.find(id); it != scene.entities.end()) it->second.pose = pose;
            }
          },
      },
      effect);
}

const Entity& require_entity(const TacticScene& scene, const EntityId& id) {
  const auto it = scene.entities.find(id);
  if (it == scene.entities.end()) throw Error(Errc::UnknownEntity, "no entity '" + id + "'");
  return it->second;
}

void require_pose(const Pose& pose) {
  if (!is_valid(pose)) {
    throw Error(Errc::InvalidPose, "pose must be finite with z >= 0 and yaw in [-pi, pi)");
  }
}

Playback next_playback(const LoadedSequence& loaded, const PlaybackControl& control,
                       SessionMs now_ms) {
  const double duration = loaded.sequence.duration_ms();
  const Playback& current = loaded.playback;
  const double head = current.playhead_at(now_ms, duration);
  Playback next = current;
  next.anchor_ms = now_ms;
  switch (control.action) {
    case PlaybackControl::Action::Play:
      if (!(control.rate > 0.0) || !std::isfinite(control.rate)) {
        throw Error(Errc::InvalidArgument, "playback rate must be positive");
      }
      next.state = Playback::State::Playing;
      next.rate = control.rate;
      next.playhead_ms = head >= duration ? 0.0 : head;
      break;
    case PlaybackControl::Action::Pause:
      next.state = Playback::State::Paused;
      next.playhead_ms = head;
      break;
    case PlaybackControl::Action::Seek:
      if (!std::isfinite(control.position_ms)) {
        throw Error(Errc::InvalidArgument, "seek position must be finite");
      }
      next.playhead_ms = std::clamp(control.position_ms, 0.0, duration);
      if (next.state == Playback::State::Stopped) next.state = Playback::State::Paused;
      break;
    case PlaybackControl::Action::Stop:
      next.state = Playback::State::Stopped;
      next.playhead_ms = 0.0;
      break;
  }
  return next;
}

DeltaEffect effect_for(const TacticScene& scene, const Command& cmd, SessionMs now_ms,
                       const MotionLimits& limits) {
  return std::visit(
      overloaded{
          [&](const SpawnEntity& c) -> DeltaEffect {
            if (scene.entities.contains(c.entity.id)) {
              throw Error(Errc::DuplicateId, "entity '" + c.entity.id + "' already exists");
            }
            require_pose(c.entity.pose);
            if (!is_valid(c.entity)) {
              throw Error(Errc::InvalidArgument, "entity '" + c.entity.id + "' violates invariants");
            }
            return EntityUpsert{c.entity};
          },
          [&](const RemoveEntity& c) -> DeltaEffect {
            require_entity(scene, c.id);
            return EntityRemove{c.id};
          },
          [&](const TeleportEntity& c) -> DeltaEffect {
            Entity entity = require_entity(scene, c.id);
            require_pose(c.pose);
            entity.pose = c.pose;
            return EntityUpsert{std::move(entity)};
          },
          [&](const RetargetEntity& c) -> DeltaEffect {
            const Entity& entity = require_entity(scene, c.id);
            if (!ground_ok(c.target, scene.pitch)) {
              throw Error(Errc::InvalidGeometry, "retarget point outside the pitch margin");
            }
            MotionPlan plan = retarget(entity.id, entity.pose, c.target, now_ms, scene.mode, limits);
            AnticipationCue cue = anticipation_cue(plan, now_ms);
            return PlanStart{std::move(plan), std::move(cue)};
          },
          [&](const AddAnnotation& c) -> DeltaEffect {
            if (scene.annotations.contains(c.annotation.id)) {
              throw Error(Errc::DuplicateId, "annotation '" + c.annotation.id + "' already exists");
            }
            Annotation annotation = c.annotation;
            annotation.created_at = now_ms;
            annotation.author = cmd.issuer;
            if (!is_valid(annotation, scene.pitch)) {
              throw Error(Errc::InvalidGeometry, "annotation '" + annotation.id + "' is malformed");
            }
            return AnnotationUpsert{std::move(annotation)};
          },
          [&](const RemoveAnnotation& c) -> DeltaEffect {
            if (!scene.annotations.contains(c.id)) {
              throw Error(Errc::UnknownEntity, "no annotation '" + c.id + "'");
            }
            return AnnotationRemove{c.id};
          },
          [&](const SetMode& c) -> DeltaEffect { return ModeChange{c.mode}; },
          [&](const LoadSequence& c) -> DeltaEffect {
            if (!is_valid(c.sequence)) {
              throw Error(Errc::InvalidGeometry, "sequence keyframes must start at 0 and increase");
            }
            return SequenceLoad{c.sequence};
          },
          [&](const PlaybackControl& c) -> DeltaEffect {
            if (!scene.sequence) throw Error(Errc::NoSequence, "no sequence loaded");
            return PlaybackChange{next_playback(*scene.sequence, c, now_ms)};
          },
          [&](const PlayerPose& c) -> DeltaEffect {
            require_entity(scene, c.id);
            require_pose(c.pose);
            return PoseUpdate{{{c.id, c.pose}}};
          },
      },
      cmd.body);
}

}  // namespace

AppliedCommand commit_effect(TacticScene scene, DeltaEffect effect, SessionMs now_ms) {
  StateDelta delta{scene.version + 1, now_ms, std::move(effect)};
  apply_effect(scene, delta.effect);
  scene.version = delta.seq;
  return {std::move(scene), std::move(delta), true};
}

AppliedCommand apply_command(TacticScene scene, const Command& cmd, SessionMs now_ms,
                             const MotionLimits& limits) {
  const bool journaled = !std::holds_alternative<PlayerPose>(cmd.body);
  const auto key = std::make_pair(cmd.issuer, cmd.command_id);
  if (journaled) {
    if (auto it = scene.command_journal.find(key); it != scene.command_journal.end()) {
      StateDelta original = it->second;
      return {std::move(scene), std::move(original), false};
    }
  }
  DeltaEffect effect = effect_for(scene, cmd, now_ms, limits);
  AppliedCommand applied = commit_effect(std::move(scene), std::move(effect), now_ms);
  if (journaled) applied.scene.command_journal.emplace(key, applied.delta);
  return applied;
}

TacticScene apply_delta(TacticScene scene, const StateDelta& delta) {
  if (delta.seq <= scene.version) return scene;
  if (delta.seq != scene.version + 1) {
    throw Error(Errc::SequenceGap, "delta " + std::to_string(delta.seq) + " onto version " +
                                       std::to_string(scene.version));
  }
  apply_effect(scene, delta.effect);
  scene.version = delta.seq;
  return scene;
}

}  // namespace panocoach
