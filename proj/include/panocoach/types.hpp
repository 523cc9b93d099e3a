// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace panocoach {

using EntityId = std::string;
using AnnotationId = std::string;
using ClientId = std::string;
using CommandId = std::uint64_t;
using Seq = std::uint64_t;

/// Milliseconds since the session became active.
using SessionMs = std::int64_t;

/// Ground-plane point in world meters (x along pitch length, y along width).
using GroundPoint = Eigen::Vector2d;
/// World point in meters, z up.
using WorldPoint = Eigen::Vector3d;
/// Tactic-board coordinate, both components in [0, 1].
using BoardPoint = Eigen::Vector2d;

struct PitchSpec {
  double length_m = 105.0;
  double width_m = 68.0;

  bool operator==(const PitchSpec&) const = default;
};

/// Annotation coordinates may extend this far past the touchlines.
inline constexpr double kPitchMarginM = 5.0;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;  ///< radians in [-pi, pi), 0 faces +x, counterclockwise about +z

  GroundPoint ground() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

enum class SessionMode { Lecture, Rehearsal, Review };

std::string_view to_string(SessionMode mode);
SessionMode session_mode_from_string(std::string_view name);

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(radians + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  wrapped -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi
  return wrapped >= std::numbers::pi ? -std::numbers::pi : wrapped;
}

inline bool is_valid(const PitchSpec& pitch) {
  return std::isfinite(pitch.length_m) && std::isfinite(pitch.width_m) && pitch.length_m > 0.0 &&
         pitch.width_m > 0.0;
}

inline bool is_valid(const Pose& pose) {
  return std::isfinite(pose.x) && std::isfinite(pose.y) && std::isfinite(pose.z) &&
         std::isfinite(pose.yaw) && pose.z >= 0.0 && pose.yaw >= -std::numbers::pi &&
         pose.yaw < std::numbers::pi;
}

/// True when the ground point lies inside the pitch expanded by `margin_m`.
inline bool within_pitch(const PitchSpec& pitch, double x, double y, double margin_m = 0.0) {
  return std::isfinite(x) && std::isfinite(y) && std::abs(x) <= pitch.length_m / 2.0 + margin_m &&
         std::abs(y) <= pitch.width_m / 2.0 + margin_m;
}

}  // namespace panocoach
