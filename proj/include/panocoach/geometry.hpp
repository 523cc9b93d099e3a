// SPDX-License-Identifier: Apache-2.0
//
// Cross-view math: tactic board <-> world ground plane, first-person and
// broadcast camera projection, distance-compensated billboard sizing.
//
// World frame: origin at pitch center, x along the length, y along the width,
// z up (right-handed). Board frame: u in [0,1] along the length (u = 0 at
// x = -L/2), v in [0,1] along the width (v = 0 at y = -W/2).
//
// NDC convention shared with the board UI: x in [-1,1] grows to the viewer's
// right, y in [-1,1] grows up, depth is the forward distance in meters.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "panocoach/types.hpp"

namespace panocoach {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
struct BoardProjection {
  Vector2<Scalar> point;
  bool out_of_bounds = false;
};

template <typename Derived>
Vector2<typename Derived::Scalar> board_to_world(const Eigen::MatrixBase<Derived>& uv,
                                                 const PitchSpec& pitch) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 2);
  using Scalar = typename Derived::Scalar;
  return {(uv.x() - Scalar(0.5)) * Scalar(pitch.length_m),
          (uv.y() - Scalar(0.5)) * Scalar(pitch.width_m)};
}

/// Inverse of board_to_world on the pitch. Off-pitch points are clamped onto
/// the board edge and flagged.
template <typename Derived>
BoardProjection<typename Derived::Scalar> world_to_board(const Eigen::MatrixBase<Derived>& xy,
                                                         const PitchSpec& pitch) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 2);
  using Scalar = typename Derived::Scalar;
  Vector2<Scalar> uv{xy.x() / Scalar(pitch.length_m) + Scalar(0.5),
                     xy.y() / Scalar(pitch.width_m) + Scalar(0.5)};
  const bool outside = uv.x() < Scalar(0) || uv.x() > Scalar(1) || uv.y() < Scalar(0) ||
                       uv.y() > Scalar(1);
  if (outside) uv = uv.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  return {uv, outside};
}

struct CameraParams {
  double eye_height_m = 1.7;
  double hfov_rad = std::numbers::pi / 2.0;
  double aspect = 16.0 / 9.0;
  double near_m = 0.1;
  double pitch_rad = 0.0;  ///< positive looks up

  bool operator==(const CameraParams&) const = default;
};

inline bool is_valid(const CameraParams& cam) {
  return std::isfinite(cam.eye_height_m) && cam.hfov_rad > 0.0 && cam.hfov_rad < std::numbers::pi &&
         cam.aspect > 0.0 && cam.near_m > 0.0 && std::isfinite(cam.pitch_rad);
}

template <typename Scalar>
struct NdcPoint {
  Scalar x;
  Scalar y;
  Scalar depth_m;
};

/// Orthonormal viewing basis for a yaw/pitch heading.
template <typename Scalar>
struct ViewBasis {
  Vector3<Scalar> forward;
  Vector3<Scalar> right;
  Vector3<Scalar> up;

  static ViewBasis from_angles(Scalar yaw, Scalar pitch) {
    using std::cos;
    using std::sin;
    ViewBasis b;
    b.forward = {cos(yaw) * cos(pitch), sin(yaw) * cos(pitch), sin(pitch)};
    b.right = {sin(yaw), -cos(yaw), Scalar(0)};
    b.up = b.right.cross(b.forward).normalized();
    return b;
  }
};

/// Projects a world point into the viewer's first-person frustum. Returns
/// std::nullopt when the point is culled (behind the near plane or outside the
/// horizontal/vertical field of view).
template <typename Derived>
std::optional<NdcPoint<typename Derived::Scalar>> fpv_project(const Pose& viewer,
                                                              const CameraParams& cam,
                                                              const Eigen::MatrixBase<Derived>& point) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  using Scalar = typename Derived::Scalar;
  const Vector3<Scalar> eye{Scalar(viewer.x), Scalar(viewer.y),
                            Scalar(viewer.z) + Scalar(cam.eye_height_m)};
  const auto basis = ViewBasis<Scalar>::from_angles(Scalar(viewer.yaw), Scalar(cam.pitch_rad));
  const Vector3<Scalar> d = point - eye;
  const Scalar depth = d.dot(basis.forward);
  if (!(depth > Scalar(cam.near_m))) return std::nullopt;

  using std::abs;
  using std::tan;
  const Scalar half_width = depth * tan(Scalar(cam.hfov_rad) / Scalar(2));
  const Scalar half_height = half_width / Scalar(cam.aspect);
  NdcPoint<Scalar> ndc{d.dot(basis.right) / half_width, d.dot(basis.up) / half_height, depth};
  // tan(pi/4) rounds below 1, so points exactly on an edge can overshoot by an
  // ulp; accept a hair of slack and snap onto the edge.
  const Scalar slack = Scalar(1) + Scalar(64) * Eigen::NumTraits<Scalar>::epsilon();
  if (abs(ndc.x) > slack || abs(ndc.y) > slack) return std::nullopt;
  ndc.x = std::clamp(ndc.x, Scalar(-1), Scalar(1));
  ndc.y = std::clamp(ndc.y, Scalar(-1), Scalar(1));
  return ndc;
}

/// World-space size that keeps an annotation's apparent size constant beyond
/// the reference distance.
template <typename Scalar>
Scalar billboard_size(Scalar base_m, Scalar distance_m, Scalar d_ref_m) {
  if (distance_m <= d_ref_m) return base_m;
  return base_m * (distance_m / d_ref_m);
}

struct CameraPreset {
  Pose pose;
  CameraParams params;
};

/// Elevated sideline camera for the broadcast-style view.
inline CameraPreset broadcast_camera() {
  CameraPreset preset;
  preset.pose = Pose{0.0, -45.0, 18.0, std::numbers::pi / 2.0};
  preset.params.eye_height_m = 0.0;
  preset.params.pitch_rad = -0.35;
  return preset;
}

}  // namespace panocoach
