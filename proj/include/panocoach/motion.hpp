// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "panocoach/types.hpp"

namespace panocoach {

enum class Easing { Linear, Smoothstep };

std::string_view to_string(Easing easing);
Easing easing_from_string(std::string_view name);

/// Speed and duration limits for coach-driven avatar motion.
struct MotionLimits {
  double v_max_mps = 8.0;
  double t_min_ms = 300.0;
  double t_max_ms = 5000.0;
  /// Lead time of the anticipation cue in Lecture mode.
  double lecture_anticipation_ms = 500.0;
};

struct MotionPlan {
  EntityId entity_id;
  GroundPoint from = GroundPoint::Zero();
  GroundPoint to = GroundPoint::Zero();
  double from_yaw = 0.0;  ///< facing kept by zero-length plans
  SessionMs start_ms = 0;
  double duration_ms = 0.0;
  SessionMs anticipation_ms = 0;
  Easing easing = Easing::Smoothstep;

  double end_ms() const { return static_cast<double>(start_ms) + duration_ms; }
  bool operator==(const MotionPlan&) const = default;
};

/// Clamped travel duration for a straight move at v_max.
double travel_duration_ms(double distance_m, const MotionLimits& limits);

MotionPlan retarget(const EntityId& entity_id, const Pose& current, const GroundPoint& to,
                    SessionMs now_ms, SessionMode mode, const MotionLimits& limits = {});

double ease(Easing easing, double s);

Pose sample_motion(const MotionPlan& plan, double t_ms);

struct Keyframe {
  double t_ms = 0.0;
  GroundPoint point = GroundPoint::Zero();

  bool operator==(const Keyframe&) const = default;
};

using Track = std::vector<Keyframe>;

struct TacticSequence {
  std::string id;
  std::string name;
  std::map<EntityId, Track> tracks;
  std::vector<std::string> warnings;

  double duration_ms() const;
  bool operator==(const TacticSequence&) const = default;
};

/// Keyframe times strictly increasing from 0, every point finite, no empty track.
bool is_valid(const TacticSequence& seq);

Pose sample_track(const Track& track, double t_ms);
std::map<EntityId, Pose> sample_sequence(const TacticSequence& seq, double t_ms);

struct TimedSample {
  double t_ms = 0.0;
  GroundPoint point = GroundPoint::Zero();
};

struct DeviationReport {
  EntityId entity_id;
  double mean_m = 0.0;
  double max_m = 0.0;
  double rms_m = 0.0;
  double on_plan_fraction = 0.0;
  std::size_t sample_count = 0;
};

DeviationReport path_deviation(const EntityId& entity_id, const Track& planned,
                               std::span<const TimedSample> actual, double tau_m);
DeviationReport path_deviation(const MotionPlan& planned, std::span<const TimedSample> actual,
                               double tau_m);

}  // namespace panocoach
