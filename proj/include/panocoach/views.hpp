// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "panocoach/geometry.hpp"
#include "panocoach/scene.hpp"

namespace panocoach {

/// Per-session knobs for how annotations appear in first-person views.
struct ViewConfig {
  std::size_t n_max = 5;
  double d_ref_m = 15.0;
  double base_size_m = 0.5;
  CameraParams camera;
};

/// Ground distance from `from` to the nearest point of the annotation's
/// footprint (zero inside a zone).
double ground_distance(const Annotation& annotation, const GroundPoint& from);

/// At most n_max annotations, ordered by priority desc, created_at desc,
/// ground distance asc, id asc. Annotations created after now_ms are skipped.
std::vector<Annotation> select_visible_annotations(std::span<const Annotation> annotations,
                                                   const Pose& viewer, std::size_t n_max,
                                                   SessionMs now_ms);

struct BoardPolyline {
  std::vector<BoardPoint> points;
};
struct BoardArrow {
  BoardPoint from = BoardPoint::Zero();
  BoardPoint to = BoardPoint::Zero();
};
struct BoardPolygon {
  std::vector<BoardPoint> points;
};
struct BoardMarker {
  BoardPoint at = BoardPoint::Zero();
  std::string text;
};

using BoardShape = std::variant<BoardPolyline, BoardArrow, BoardPolygon, BoardMarker>;

/// Drops z and maps every vertex onto the board.
BoardShape minimap_footprint(const Annotation& annotation, const PitchSpec& pitch);

/// One projected item of a first-person frame.
struct FpvItem {
  std::string id;
  std::string kind;  ///< "entity" or "annotation"
  /// NDC of each vertex, nullopt when culled. Entities contribute one point:
  /// eye level for players, ground level for balls and cones.
  std::vector<std::optional<NdcPoint<double>>> vertices;
  double size_m = 0.0;  ///< billboard size for annotations
};

/// Reference frame for the board UI's FPV preview: every other entity and the
/// selected annotations as seen from `viewer_id`.
std::vector<FpvItem> fpv_reference(const TacticScene& scene, const EntityId& viewer_id,
                                   const ViewConfig& config, SessionMs now_ms);

}  // namespace panocoach
