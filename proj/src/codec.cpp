// SPDX-License-Identifier: Apache-2.0
#include "panocoach/codec.hpp"

#include <cmath>
#include <limits>

#include "json_fields.hpp"
#include "panocoach/error.hpp"

namespace panocoach {

namespace {

using namespace json_fields;

Json world_to_json(const WorldPoint& p) { return Json::array({p.x(), p.y(), p.z()}); }

WorldPoint world_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) malformed("3D point must be [x, y, z]");
  return {as_double(j[0], "x"), as_double(j[1], "y"), as_double(j[2], "z")};
}

Json points_to_json(const std::vector<GroundPoint>& points) {
  Json out = Json::array();
  for (const auto& p : points) out.push_back(ground_to_json(p));
  return out;
}

std::vector<GroundPoint> points_from_json(const Json& j) {
  if (!j.is_array()) malformed("point list must be an array");
  std::vector<GroundPoint> out;
  out.reserve(j.size());
  for (const auto& p : j) out.push_back(ground_from_json(p));
  return out;
}

Json shape_to_json(const AnnotationShape& shape) {
  return std::visit(
      overloaded{
          [](const Polyline& s) { return Json{{"type", "Polyline"}, {"points", points_to_json(s.points)}}; },
          [](const Arrow2D& s) {
            return Json{{"type", "Arrow2D"}, {"from", ground_to_json(s.from)}, {"to", ground_to_json(s.to)}};
          },
          [](const Arrow3D& s) {
            return Json{{"type", "Arrow3D"}, {"from", world_to_json(s.from)}, {"to", world_to_json(s.to)}};
          },
          [](const Zone& s) { return Json{{"type", "Zone"}, {"polygon", points_to_json(s.polygon)}}; },
          [](const Marker& s) {
            return Json{{"type", "Marker"}, {"at", ground_to_json(s.at)}, {"text", s.text}};
          },
      },
      shape);
}

AnnotationShape shape_from_json(const Json& j) {
  const std::string type = get_string(j, "type");
  if (type == "Polyline") return Polyline{points_from_json(field(j, "points"))};
  if (type == "Arrow2D") return Arrow2D{ground_from_json(field(j, "from")), ground_from_json(field(j, "to"))};
  if (type == "Arrow3D") return Arrow3D{world_from_json(field(j, "from")), world_from_json(field(j, "to"))};
  if (type == "Zone") return Zone{points_from_json(field(j, "polygon"))};
  if (type == "Marker") return Marker{ground_from_json(field(j, "at")), get_string(j, "text")};
  malformed("unknown annotation shape '" + type + "'");
}

Json cue_to_json(const AnticipationCue& cue) {
  return {{"ghost", ground_to_json(cue.ghost)},
          {"path", points_to_json(cue.path)},
          {"visible_from_ms", cue.visible_from_ms},
          {"visible_until_ms", cue.visible_until_ms}};
}

AnticipationCue cue_from_json(const Json& j) {
  return {ground_from_json(field(j, "ghost")), points_from_json(field(j, "path")),
          get_int(j, "visible_from_ms"), get_double(j, "visible_until_ms")};
}

}  // namespace

Json pose_to_json(const Pose& pose) {
  return {{"x", pose.x}, {"y", pose.y}, {"z", pose.z}, {"yaw", pose.yaw}};
}

Pose pose_from_json(const Json& j) {
  return {get_double(j, "x"), get_double(j, "y"), get_double(j, "z"), get_double(j, "yaw")};
}

Json ground_to_json(const GroundPoint& p) { return Json::array({p.x(), p.y()}); }

GroundPoint ground_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) malformed("ground point must be [x, y]");
  return {as_double(j[0], "x"), as_double(j[1], "y")};
}

Json pitch_to_json(const PitchSpec& pitch) {
  return {{"length_m", pitch.length_m}, {"width_m", pitch.width_m}};
}

PitchSpec pitch_from_json(const Json& j) {
  PitchSpec pitch{get_double(j, "length_m"), get_double(j, "width_m")};
  if (!is_valid(pitch)) malformed("pitch dimensions must be positive");
  return pitch;
}

Json entity_to_json(const Entity& e) {
  Json controller = e.controller.is_coach()
                        ? Json{{"type", "Coach"}}
                        : Json{{"type", "PlayerClient"}, {"client_id", *e.controller.client}};
  return {{"id", e.id},
          {"kind", to_string(e.kind)},
          {"team", e.team ? Json(to_string(*e.team)) : Json(nullptr)},
          {"label", e.label},
          {"pose", pose_to_json(e.pose)},
          {"controller", std::move(controller)},
          {"height_m", e.height_m},
          {"speed_mps", e.speed_mps}};
}

Entity entity_from_json(const Json& j) {
  Entity e;
  e.id = get_string(j, "id");
  e.kind = named(j, "kind", entity_kind_from_string);
  const Json& team = field(j, "team");
  if (!team.is_null()) e.team = named(j, "team", team_from_string);
  e.label = get_string(j, "label");
  e.pose = pose_from_json(field(j, "pose"));
  const Json& controller = field(j, "controller");
  const std::string type = get_string(controller, "type");
  if (type == "PlayerClient") {
    e.controller = Controller::player_client(get_string(controller, "client_id"));
  } else if (type != "Coach") {
    malformed("unknown controller '" + type + "'");
  }
  e.height_m = get_double(j, "height_m");
  e.speed_mps = get_double(j, "speed_mps");
  return e;
}

Json annotation_to_json(const Annotation& a) {
  return {{"id", a.id},
          {"shape", shape_to_json(a.shape)},
          {"priority", a.priority},
          {"created_at", a.created_at},
          {"author", a.author}};
}

Annotation annotation_from_json(const Json& j) {
  Annotation a;
  a.id = get_string(j, "id");
  a.shape = shape_from_json(field(j, "shape"));
  if (j.contains("priority")) {
    const auto priority = get_int(j, "priority");
    if (priority < 0 || priority > std::numeric_limits<int>::max()) malformed("priority out of range");
    a.priority = static_cast<int>(priority);
  }
  if (j.contains("created_at")) a.created_at = get_int(j, "created_at");
  if (j.contains("author")) a.author = get_string(j, "author");
  return a;
}

Json plan_to_json(const MotionPlan& p) {
  return {{"entity_id", p.entity_id},
          {"from", ground_to_json(p.from)},
          {"to", ground_to_json(p.to)},
          {"from_yaw", p.from_yaw},
          {"start_ms", p.start_ms},
          {"duration_ms", p.duration_ms},
          {"anticipation_ms", p.anticipation_ms},
          {"easing", to_string(p.easing)}};
}

MotionPlan plan_from_json(const Json& j) {
  MotionPlan p;
  p.entity_id = get_string(j, "entity_id");
  p.from = ground_from_json(field(j, "from"));
  p.to = ground_from_json(field(j, "to"));
  p.from_yaw = get_double(j, "from_yaw");
  p.start_ms = get_int(j, "start_ms");
  p.duration_ms = get_double(j, "duration_ms");
  p.anticipation_ms = get_int(j, "anticipation_ms");
  p.easing = named(j, "easing", easing_from_string);
  if (!(p.duration_ms > 0.0)) malformed("plan duration must be positive");
  return p;
}

Json sequence_to_json(const TacticSequence& seq) {
  Json tracks = Json::object();
  for (const auto& [id, track] : seq.tracks) {
    Json keys = Json::array();
    for (const auto& k : track) keys.push_back(Json::array({k.t_ms, k.point.x(), k.point.y()}));
    tracks[id] = std::move(keys);
  }
  return {{"id", seq.id}, {"name", seq.name}, {"tracks", std::move(tracks)}, {"warnings", seq.warnings}};
}

TacticSequence sequence_from_json(const Json& j) {
  TacticSequence seq;
  seq.id = get_string(j, "id");
  seq.name = get_string(j, "name");
  const Json& tracks = field(j, "tracks");
  if (!tracks.is_object()) malformed("'tracks' must be an object");
  for (const auto& [id, keys] : tracks.items()) {
    if (!keys.is_array()) malformed("track '" + id + "' must be an array");
    Track track;
    for (const auto& k : keys) {
      if (!k.is_array() || k.size() != 3) malformed("keyframe must be [t_ms, x, y]");
      track.push_back({as_double(k[0], "t_ms"), {as_double(k[1], "x"), as_double(k[2], "y")}});
    }
    seq.tracks.emplace(id, std::move(track));
  }
  if (j.contains("warnings")) {
    for (const auto& w : get_array(j, "warnings")) {
      if (!w.is_string()) malformed("warnings must be strings");
      seq.warnings.push_back(w.get<std::string>());
    }
  }
  return seq;
}

Json playback_to_json(const Playback& p) {
  return {{"state", to_string(p.state)},
          {"rate", p.rate},
          {"playhead_ms", p.playhead_ms},
          {"anchor_ms", p.anchor_ms}};
}

Playback playback_from_json(const Json& j) {
  Playback p;
  p.state = named(j, "state", playback_state_from_string);
  p.rate = get_double(j, "rate");
  p.playhead_ms = get_double(j, "playhead_ms");
  p.anchor_ms = get_int(j, "anchor_ms");
  return p;
}

Json scene_to_json(const TacticScene& scene) {
  Json entities = Json::array();
  for (const auto& [id, e] : scene.entities) entities.push_back(entity_to_json(e));
  Json annotations = Json::array();
  for (const auto& [id, a] : scene.annotations) annotations.push_back(annotation_to_json(a));
  Json plans = Json::array();
  for (const auto& [id, p] : scene.active_plans) plans.push_back(plan_to_json(p));
  Json sequence = nullptr;
  if (scene.sequence) {
    sequence = {{"sequence", sequence_to_json(scene.sequence->sequence)},
                {"playback", playback_to_json(scene.sequence->playback)}};
  }
  return {{"pitch", pitch_to_json(scene.pitch)},
          {"entities", std::move(entities)},
          {"annotations", std::move(annotations)},
          {"mode", to_string(scene.mode)},
          {"active_plans", std::move(plans)},
          {"sequence", std::move(sequence)},
          {"version", scene.version}};
}

TacticScene scene_from_json(const Json& j) {
  TacticScene scene;
  scene.pitch = pitch_from_json(field(j, "pitch"));
  for (const auto& e : get_array(j, "entities")) {
    Entity entity = entity_from_json(e);
    const EntityId id = entity.id;
    if (!scene.entities.emplace(id, std::move(entity)).second) malformed("duplicate entity '" + id + "'");
  }
  for (const auto& a : get_array(j, "annotations")) {
    Annotation annotation = annotation_from_json(a);
    const AnnotationId id = annotation.id;
    if (!scene.annotations.emplace(id, std::move(annotation)).second) {
      malformed("duplicate annotation '" + id + "'");
    }
  }
  scene.mode = named(j, "mode", session_mode_from_string);
  for (const auto& p : get_array(j, "active_plans")) {
    MotionPlan plan = plan_from_json(p);
    if (!scene.entities.contains(plan.entity_id)) malformed("plan for unknown entity");
    const EntityId id = plan.entity_id;
    scene.active_plans.emplace(id, std::move(plan));
  }
  const Json& sequence = field(j, "sequence");
  if (!sequence.is_null()) {
    scene.sequence = LoadedSequence{sequence_from_json(field(sequence, "sequence")),
                                    playback_from_json(field(sequence, "playback"))};
  }
  scene.version = get_uint(j, "version");
  return scene;
}

Json command_body_to_json(const CommandBody& body) {
  Json j = std::visit(
      overloaded{
          [](const SpawnEntity& c) { return Json{{"entity", entity_to_json(c.entity)}}; },
          [](const RemoveEntity& c) { return Json{{"id", c.id}}; },
          [](const TeleportEntity& c) { return Json{{"id", c.id}, {"pose", pose_to_json(c.pose)}}; },
          [](const RetargetEntity& c) { return Json{{"id", c.id}, {"target", ground_to_json(c.target)}}; },
          [](const AddAnnotation& c) { return Json{{"annotation", annotation_to_json(c.annotation)}}; },
          [](const RemoveAnnotation& c) { return Json{{"id", c.id}}; },
          [](const SetMode& c) { return Json{{"mode", to_string(c.mode)}}; },
          [](const LoadSequence& c) { return Json{{"sequence", sequence_to_json(c.sequence)}}; },
          [](const PlaybackControl& c) {
            Json out{{"action", to_string(c.action)}};
            if (c.action == PlaybackControl::Action::Play) out["rate"] = c.rate;
            if (c.action == PlaybackControl::Action::Seek) out["position_ms"] = c.position_ms;
            return out;
          },
          [](const PlayerPose& c) { return Json{{"id", c.id}, {"pose", pose_to_json(c.pose)}}; },
      },
      body);
  j["type"] = command_name(body);
  return j;
}

CommandBody command_body_from_json(const Json& j) {
  const std::string type = get_string(j, "type");
  if (type == "SpawnEntity") return SpawnEntity{entity_from_json(field(j, "entity"))};
  if (type == "RemoveEntity") return RemoveEntity{get_string(j, "id")};
  if (type == "TeleportEntity") return TeleportEntity{get_string(j, "id"), pose_from_json(field(j, "pose"))};
  if (type == "RetargetEntity") {
    return RetargetEntity{get_string(j, "id"), ground_from_json(field(j, "target"))};
  }
  if (type == "AddAnnotation") return AddAnnotation{annotation_from_json(field(j, "annotation"))};
  if (type == "RemoveAnnotation") return RemoveAnnotation{get_string(j, "id")};
  if (type == "SetMode") return SetMode{named(j, "mode", session_mode_from_string)};
  if (type == "LoadSequence") return LoadSequence{sequence_from_json(field(j, "sequence"))};
  if (type == "PlaybackControl") {
    PlaybackControl c;
    c.action = named(j, "action", playback_action_from_string);
    if (c.action == PlaybackControl::Action::Play) c.rate = j.contains("rate") ? get_double(j, "rate") : 1.0;
    if (c.action == PlaybackControl::Action::Seek) c.position_ms = get_double(j, "position_ms");
    return c;
  }
  if (type == "PlayerPose") return PlayerPose{get_string(j, "id"), pose_from_json(field(j, "pose"))};
  malformed("unknown command '" + type + "'");
}

Json effect_to_json(const DeltaEffect& effect) {
  Json j = std::visit(
      overloaded{
          [](const EntityUpsert& e) { return Json{{"entity", entity_to_json(e.entity)}}; },
          [](const EntityRemove& e) { return Json{{"id", e.id}}; },
          [](const AnnotationUpsert& e) { return Json{{"annotation", annotation_to_json(e.annotation)}}; },
          [](const AnnotationRemove& e) { return Json{{"id", e.id}}; },
          [](const ModeChange& e) { return Json{{"mode", to_string(e.mode)}}; },
          [](const PlanStart& e) { return Json{{"plan", plan_to_json(e.plan)}, {"cue", cue_to_json(e.cue)}}; },
          [](const PlanEnd& e) { return Json{{"ids", e.ids}}; },
          [](const SequenceLoad& e) { return Json{{"sequence", sequence_to_json(e.sequence)}}; },
          [](const PlaybackChange& e) { return Json{{"playback", playback_to_json(e.playback)}}; },
          [](const PoseUpdate& e) {
            Json poses = Json::array();
            for (const auto& [id, pose] : e.poses) poses.push_back({{"id", id}, {"pose", pose_to_json(pose)}});
            return Json{{"poses", std::move(poses)}};
          },
      },
      effect);
  j["type"] = effect_name(effect);
  return j;
}

DeltaEffect effect_from_json(const Json& j) {
  const std::string type = get_string(j, "type");
  if (type == "EntityUpsert") return EntityUpsert{entity_from_json(field(j, "entity"))};
  if (type == "EntityRemove") return EntityRemove{get_string(j, "id")};
  if (type == "AnnotationUpsert") return AnnotationUpsert{annotation_from_json(field(j, "annotation"))};
  if (type == "AnnotationRemove") return AnnotationRemove{get_string(j, "id")};
  if (type == "ModeChange") return ModeChange{named(j, "mode", session_mode_from_string)};
  if (type == "PlanStart") return PlanStart{plan_from_json(field(j, "plan")), cue_from_json(field(j, "cue"))};
  if (type == "PlanEnd") {
    PlanEnd e;
    for (const auto& id : get_array(j, "ids")) {
      if (!id.is_string()) malformed("plan ids must be strings");
      e.ids.push_back(id.get<std::string>());
    }
    return e;
  }
  if (type == "SequenceLoad") return SequenceLoad{sequence_from_json(field(j, "sequence"))};
  if (type == "PlaybackChange") return PlaybackChange{playback_from_json(field(j, "playback"))};
  if (type == "PoseUpdate") {
    PoseUpdate e;
    for (const auto& p : get_array(j, "poses")) {
      e.poses.emplace_back(get_string(p, "id"), pose_from_json(field(p, "pose")));
    }
    return e;
  }
  malformed("unknown effect '" + type + "'");
}

}  // namespace panocoach
