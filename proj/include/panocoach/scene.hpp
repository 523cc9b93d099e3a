// SPDX-License-Identifier: Apache-2.0
//
// Authoritative tactic scene, the commands that mutate it and the deltas that
// replicate those mutations. Every operation here is a pure function of its
// arguments; the server replaces its scene value with the returned one.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "panocoach/motion.hpp"
#include "panocoach/types.hpp"

namespace panocoach {

enum class EntityKind { Player, Ball, Cone };
enum class Team { Home, Away };

std::string_view to_string(EntityKind kind);
std::string_view to_string(Team team);
EntityKind entity_kind_from_string(std::string_view name);
Team team_from_string(std::string_view name);

/// Who moves an entity. An empty client means the coach.
struct Controller {
  std::optional<ClientId> client;

  static Controller coach() { return {}; }
  static Controller player_client(ClientId id) { return {std::move(id)}; }
  bool is_coach() const { return !client.has_value(); }
  bool operator==(const Controller&) const = default;
};

struct Entity {
  EntityId id;
  EntityKind kind = EntityKind::Player;
  std::optional<Team> team;
  std::string label;
  Pose pose;
  Controller controller;
  double height_m = 1.8;
  double speed_mps = 0.0;

  bool operator==(const Entity&) const = default;
};

struct Polyline {
  std::vector<GroundPoint> points;
  bool operator==(const Polyline&) const = default;
};
struct Arrow2D {
  GroundPoint from = GroundPoint::Zero();
  GroundPoint to = GroundPoint::Zero();
  bool operator==(const Arrow2D&) const = default;
};
struct Arrow3D {
  WorldPoint from = WorldPoint::Zero();
  WorldPoint to = WorldPoint::Zero();
  bool operator==(const Arrow3D&) const = default;
};
struct Zone {
  std::vector<GroundPoint> polygon;
  bool operator==(const Zone&) const = default;
};
struct Marker {
  GroundPoint at = GroundPoint::Zero();
  std::string text;
  bool operator==(const Marker&) const = default;
};

using AnnotationShape = std::variant<Polyline, Arrow2D, Arrow3D, Zone, Marker>;

struct Annotation {
  AnnotationId id;
  AnnotationShape shape;
  int priority = 0;
  SessionMs created_at = 0;
  ClientId author;

  bool operator==(const Annotation&) const = default;
};

/// True when the polygon has >= 3 vertices and no two edges meet except
/// adjacent edges at their shared vertex.
bool is_simple_polygon(const std::vector<GroundPoint>& polygon);

/// Checks the annotation invariants against the pitch (5 m margin).
bool is_valid(const Annotation& annotation, const PitchSpec& pitch);
bool is_valid(const Entity& entity);

struct Playback {
  enum class State { Stopped, Playing, Paused };
  State state = State::Stopped;
  double rate = 1.0;
  double playhead_ms = 0.0;  ///< playhead at anchor_ms
  SessionMs anchor_ms = 0;

  /// Sequence time at session time `now_ms`, clamped to [0, duration_ms].
  double playhead_at(SessionMs now_ms, double duration_ms) const;
  bool operator==(const Playback&) const = default;
};

std::string_view to_string(Playback::State state);
Playback::State playback_state_from_string(std::string_view name);

struct LoadedSequence {
  TacticSequence sequence;
  Playback playback;
  bool operator==(const LoadedSequence&) const = default;
};

struct StateDelta;

// -- Commands ---------------------------------------------------------------

struct SpawnEntity {
  Entity entity;
  bool operator==(const SpawnEntity&) const = default;
};
struct RemoveEntity {
  EntityId id;
  bool operator==(const RemoveEntity&) const = default;
};
struct TeleportEntity {
  EntityId id;
  Pose pose;
  bool operator==(const TeleportEntity&) const = default;
};
struct RetargetEntity {
  EntityId id;
  GroundPoint target = GroundPoint::Zero();
  bool operator==(const RetargetEntity&) const = default;
};
struct AddAnnotation {
  Annotation annotation;
  bool operator==(const AddAnnotation&) const = default;
};
struct RemoveAnnotation {
  AnnotationId id;
  bool operator==(const RemoveAnnotation&) const = default;
};
struct SetMode {
  SessionMode mode = SessionMode::Lecture;
  bool operator==(const SetMode&) const = default;
};
struct LoadSequence {
  TacticSequence sequence;
  bool operator==(const LoadSequence&) const = default;
};
struct PlaybackControl {
  enum class Action { Play, Pause, Seek, Stop };
  Action action = Action::Play;
  double rate = 1.0;         ///< Play only
  double position_ms = 0.0;  ///< Seek only
  bool operator==(const PlaybackControl&) const = default;
};
struct PlayerPose {
  EntityId id;
  Pose pose;
  bool operator==(const PlayerPose&) const = default;
};

std::string_view to_string(PlaybackControl::Action action);
PlaybackControl::Action playback_action_from_string(std::string_view name);

using CommandBody = std::variant<SpawnEntity, RemoveEntity, TeleportEntity, RetargetEntity,
                                 AddAnnotation, RemoveAnnotation, SetMode, LoadSequence,
                                 PlaybackControl, PlayerPose>;

std::string_view command_name(const CommandBody& body);

struct Command {
  CommandId command_id = 0;
  ClientId issuer;
  CommandBody body;
  bool operator==(const Command&) const = default;
};

// -- Delta effects ----------------------------------------------------------

/// Inserts or replaces an entity; any active plan for it is cancelled.
struct EntityUpsert {
  Entity entity;
  bool operator==(const EntityUpsert&) const = default;
};
struct EntityRemove {
  EntityId id;
  bool operator==(const EntityRemove&) const = default;
};
struct AnnotationUpsert {
  Annotation annotation;
  bool operator==(const AnnotationUpsert&) const = default;
};
struct AnnotationRemove {
  AnnotationId id;
  bool operator==(const AnnotationRemove&) const = default;
};
struct ModeChange {
  SessionMode mode = SessionMode::Lecture;
  bool operator==(const ModeChange&) const = default;
};

/// Ghost destination and path shown to everyone before and during a move.
struct AnticipationCue {
  GroundPoint ghost = GroundPoint::Zero();
  std::vector<GroundPoint> path;
  SessionMs visible_from_ms = 0;
  double visible_until_ms = 0.0;
  bool operator==(const AnticipationCue&) const = default;
};

AnticipationCue anticipation_cue(const MotionPlan& plan, SessionMs created_ms);

/// Starts (or supersedes) the plan for plan.entity_id.
struct PlanStart {
  MotionPlan plan;
  AnticipationCue cue;
  bool operator==(const PlanStart&) const = default;
};
struct PlanEnd {
  std::vector<EntityId> ids;
  bool operator==(const PlanEnd&) const = default;
};
struct SequenceLoad {
  TacticSequence sequence;
  bool operator==(const SequenceLoad&) const = default;
};
/// Replaces playback state. Entering Playing cancels plans of tracked entities.
struct PlaybackChange {
  Playback playback;
  bool operator==(const PlaybackChange&) const = default;
};
struct PoseUpdate {
  std::vector<std::pair<EntityId, Pose>> poses;
  bool operator==(const PoseUpdate&) const = default;
};

using DeltaEffect = std::variant<EntityUpsert, EntityRemove, AnnotationUpsert, AnnotationRemove,
                                 ModeChange, PlanStart, PlanEnd, SequenceLoad, PlaybackChange,
                                 PoseUpdate>;

std::string_view effect_name(const DeltaEffect& effect);

struct StateDelta {
  Seq seq = 0;
  SessionMs session_time_ms = 0;
  DeltaEffect effect;
  bool operator==(const StateDelta&) const = default;
};

// -- Scene ------------------------------------------------------------------

struct TacticScene {
  PitchSpec pitch;
  std::map<EntityId, Entity> entities;
  std::map<AnnotationId, Annotation> annotations;
  SessionMode mode = SessionMode::Lecture;
  std::map<EntityId, MotionPlan> active_plans;
  std::optional<LoadedSequence> sequence;
  Seq version = 0;

  /// Deltas produced per (issuer, command_id). Server-side bookkeeping for
  /// idempotent replays; not part of the replicated state or the hash.
  std::map<std::pair<ClientId, CommandId>, StateDelta> command_journal;

  /// Compares replicated state only (journal excluded).
  bool operator==(const TacticScene& other) const;
};

TacticScene make_scene(const PitchSpec& pitch = {});

struct AppliedCommand {
  TacticScene scene;
  StateDelta delta;
  /// false when the command was an idempotent replay and nothing changed
  bool changed = true;
};

/// Applies an authority-checked command. Throws Error with UnknownEntity,
/// DuplicateId, InvalidGeometry, InvalidPose or NoSequence.
AppliedCommand apply_command(TacticScene scene, const Command& cmd, SessionMs now_ms,
                             const MotionLimits& limits = {});

/// Applies the next delta in sequence. A stale delta (seq <= version) returns
/// the scene unchanged; a gap throws Error(SequenceGap).
TacticScene apply_delta(TacticScene scene, const StateDelta& delta);

/// Wraps `effect` as the next delta of `scene` and applies it.
AppliedCommand commit_effect(TacticScene scene, DeltaEffect effect, SessionMs now_ms);

}  // namespace panocoach
