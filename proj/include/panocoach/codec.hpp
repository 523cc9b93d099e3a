// SPDX-License-Identifier: Apache-2.0
//
// Structured-text (JSON) forms of the scene model. Decoders are strict: a
// missing field, wrong type or unknown tag throws Error(MalformedBody).
#pragma once

#include <json.hpp>

#include "panocoach/motion.hpp"
#include "panocoach/scene.hpp"

namespace panocoach {

using Json = nlohmann::json;

Json pose_to_json(const Pose& pose);
Pose pose_from_json(const Json& j);

Json ground_to_json(const GroundPoint& p);
GroundPoint ground_from_json(const Json& j);

Json pitch_to_json(const PitchSpec& pitch);
PitchSpec pitch_from_json(const Json& j);

Json entity_to_json(const Entity& entity);
Entity entity_from_json(const Json& j);

/// created_at, author and priority are optional on input (commands omit them).
Json annotation_to_json(const Annotation& annotation);
Annotation annotation_from_json(const Json& j);

Json plan_to_json(const MotionPlan& plan);
MotionPlan plan_from_json(const Json& j);

/// World-coordinate sequence form used inside scenes, commands and deltas.
Json sequence_to_json(const TacticSequence& seq);
TacticSequence sequence_from_json(const Json& j);

Json playback_to_json(const Playback& playback);
Playback playback_from_json(const Json& j);

Json scene_to_json(const TacticScene& scene);
TacticScene scene_from_json(const Json& j);

Json command_body_to_json(const CommandBody& body);
CommandBody command_body_from_json(const Json& j);

Json effect_to_json(const DeltaEffect& effect);
DeltaEffect effect_from_json(const Json& j);

}  // namespace panocoach
