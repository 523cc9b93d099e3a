// SPDX-License-Identifier: Apache-2.0
#include "panocoach/motion.hpp"

#include <algorithm>
#include <cmath>

#include "panocoach/error.hpp"

namespace panocoach {

std::string_view to_string(Easing easing) {
  return easing == Easing::Linear ? "Linear" : "Smoothstep";
}

Easing easing_from_string(std::string_view name) {
  if (name == "Linear") return Easing::Linear;
  if (name == "Smoothstep") return Easing::Smoothstep;
  throw Error(Errc::InvalidArgument, "unknown easing '" + std::string(name) + "'");
}

double travel_duration_ms(double distance_m, const MotionLimits& limits) {
  return std::clamp(1000.0 * distance_m / limits.v_max_mps, limits.t_min_ms, limits.t_max_ms);
}

MotionPlan retarget(const EntityId& entity_id, const Pose& current, const GroundPoint& to,
                    SessionMs now_ms, SessionMode mode, const MotionLimits& limits) {
  if (!(limits.v_max_mps > 0.0)) throw Error(Errc::InvalidArgument, "v_max must be positive");
  MotionPlan plan;
  plan.entity_id = entity_id;
  plan.from = current.ground();
  plan.to = to;
  plan.from_yaw = current.yaw;
  plan.duration_ms = travel_duration_ms((to - plan.from).norm(), limits);
  plan.anticipation_ms =
      mode == SessionMode::Lecture ? static_cast<SessionMs>(limits.lecture_anticipation_ms) : 0;
  plan.easing = Easing::Smoothstep;
  plan.start_ms = now_ms + plan.anticipation_ms;
  return plan;
}

double ease(Easing easing, double s) {
  if (easing == Easing::Linear) return s;
  return s * s * (3.0 - 2.0 * s);
}

namespace {

double heading(const GroundPoint& from, const GroundPoint& to, double fallback) {
  const GroundPoint d = to - from;
  if (d.x() == 0.0 && d.y() == 0.0) return fallback;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

}  // namespace

Pose sample_motion(const MotionPlan& plan, double t_ms) {
  const double yaw = heading(plan.from, plan.to, plan.from_yaw);
  const double start = static_cast<double>(plan.start_ms);
  if (t_ms < start) return {plan.from.x(), plan.from.y(), 0.0, plan.from_yaw};
  if (t_ms >= plan.end_ms()) return {plan.to.x(), plan.to.y(), 0.0, yaw};
  const double w = ease(plan.easing, (t_ms - start) / plan.duration_ms);
  const GroundPoint p = plan.from + w * (plan.to - plan.from);
  return {p.x(), p.y(), 0.0, yaw};
}

double TacticSequence::duration_ms() const {
  double duration = 0.0;
  for (const auto& [id, track] : tracks) {
    if (!track.empty()) duration = std::max(duration, track.back().t_ms);
  }
  return duration;
}

bool is_valid(const TacticSequence& seq) {
  for (const auto& [id, track] : seq.tracks) {
    if (id.empty() || track.empty() || track.front().t_ms != 0.0) return false;
    for (std::size_t i = 0; i < track.size(); ++i) {
      const auto& k = track[i];
      if (!std::isfinite(k.t_ms) || !k.point.allFinite()) return false;
      if (i > 0 && !(k.t_ms > track[i - 1].t_ms)) return false;
    }
  }
  return true;
}

namespace {

// Facing for segment i; zero-length segments borrow the nearest moving one.
double segment_heading(const Track& track, std::size_t i) {
  const auto moving = [&](std::size_t j) { return track[j].point != track[j + 1].point; };
  if (track.size() < 2) return 0.0;
  for (std::size_t j = i + 1; j-- > 0;) {
    if (moving(j)) return heading(track[j].point, track[j + 1].point, 0.0);
  }
  for (std::size_t j = i + 1; j + 1 < track.size(); ++j) {
    if (moving(j)) return heading(track[j].point, track[j + 1].point, 0.0);
  }
  return 0.0;
}

}  // namespace

Pose sample_track(const Track& track, double t_ms) {
  if (track.empty()) throw Error(Errc::InvalidArgument, "empty track");
  if (track.size() == 1 || t_ms <= track.front().t_ms) {
    const auto& p = track.front().point;
    return {p.x(), p.y(), 0.0, segment_heading(track, 0)};
  }
  if (t_ms >= track.back().t_ms) {
    const auto& p = track.back().point;
    return {p.x(), p.y(), 0.0, segment_heading(track, track.size() - 2)};
  }
  const auto upper = std::upper_bound(track.begin(), track.end(), t_ms,
                                      [](double t, const Keyframe& k) { return t < k.t_ms; });
  const auto i = static_cast<std::size_t>(std::distance(track.begin(), upper)) - 1;
  const auto& a = track[i];
  const auto& b = track[i + 1];
  const double s = (t_ms - a.t_ms) / (b.t_ms - a.t_ms);
  const GroundPoint p = a.point + s * (b.point - a.point);
  return {p.x(), p.y(), 0.0, segment_heading(track, i)};
}

std::map<EntityId, Pose> sample_sequence(const TacticSequence& seq, double t_ms) {
  std::map<EntityId, Pose> poses;
  for (const auto& [id, track] : seq.tracks) {
    if (!track.empty()) poses.emplace(id, sample_track(track, t_ms));
  }
  return poses;
}

namespace {

template <typename PlannedAt>
DeviationReport deviation(const EntityId& entity_id, PlannedAt planned_at,
                          std::span<const TimedSample> actual, double tau_m) {
  if (actual.empty()) throw Error(Errc::EmptyActual, "no actual samples for " + entity_id);
  DeviationReport report;
  report.entity_id = entity_id;
  report.sample_count = actual.size();
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t on_plan = 0;
  double previous_t = actual.front().t_ms;
  for (const auto& sample : actual) {
    if (sample.t_ms < previous_t) {
      throw Error(Errc::InvalidArgument, "actual timestamps must be nondecreasing");
    }
    previous_t = sample.t_ms;
    const Pose planned = planned_at(sample.t_ms);
    const double dev = (sample.point - planned.ground()).norm();
    sum += dev;
    sum_sq += dev * dev;
    report.max_m = std::max(report.max_m, dev);
    if (dev < tau_m) ++on_plan;
  }
  const auto n = static_cast<double>(actual.size());
  report.mean_m = std::min(sum / n, report.max_m);
  report.rms_m = std::sqrt(sum_sq / n);
  report.on_plan_fraction = static_cast<double>(on_plan) / n;
  return report;
}

}  // namespace

DeviationReport path_deviation(const EntityId& entity_id, const Track& planned,
                               std::span<const TimedSample> actual, double tau_m) {
  return deviation(entity_id, [&](double t) { return sample_track(planned, t); }, actual, tau_m);
}

DeviationReport path_deviation(const MotionPlan& planned, std::span<const TimedSample> actual,
                               double tau_m) {
  return deviation(planned.entity_id, [&](double t) { return sample_motion(planned, t); }, actual,
                   tau_m);
}

}  // namespace panocoach
