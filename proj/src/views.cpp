// SPDX-License-Identifier: Apache-2.0
#include "panocoach/views.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "panocoach/error.hpp"

namespace panocoach {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double point_segment_distance(const GroundPoint& p, const GroundPoint& a, const GroundPoint& b) {
  const GroundPoint ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

double polyline_distance(const std::vector<GroundPoint>& points, const GroundPoint& p, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = points.size();
  if (n == 1) return (p - points.front()).norm();
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    best = std::min(best, point_segment_distance(p, points[i], points[(i + 1) % n]));
  }
  return best;
}

bool inside_polygon(const std::vector<GroundPoint>& polygon, const GroundPoint& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = polygon[i];
    const auto& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

BoardPoint to_board(const GroundPoint& p, const PitchSpec& pitch) { return world_to_board(p, pitch).point; }

std::vector<BoardPoint> to_board(const std::vector<GroundPoint>& points, const PitchSpec& pitch) {
  std::vector<BoardPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(to_board(p, pitch));
  return out;
}

std::vector<WorldPoint> annotation_vertices(const Annotation& annotation) {
  const auto lift = [](const GroundPoint& p) { return WorldPoint{p.x(), p.y(), 0.0}; };
  return std::visit(overloaded{
                        [&](const Polyline& s) {
                          std::vector<WorldPoint> out;
                          for (const auto& p : s.points) out.push_back(lift(p));
                          return out;
                        },
                        [&](const Arrow2D& s) { return std::vector<WorldPoint>{lift(s.from), lift(s.to)}; },
                        [&](const Arrow3D& s) { return std::vector<WorldPoint>{s.from, s.to}; },
                        [&](const Zone& s) {
                          std::vector<WorldPoint> out;
                          for (const auto& p : s.polygon) out.push_back(lift(p));
                          return out;
                        },
                        [&](const Marker& s) { return std::vector<WorldPoint>{lift(s.at)}; },
                    },
                    annotation.shape);
}

}  // namespace

double ground_distance(const Annotation& annotation, const GroundPoint& from) {
  return std::visit(
      overloaded{
          [&](const Polyline& s) { return polyline_distance(s.points, from, false); },
          [&](const Arrow2D& s) { return point_segment_distance(from, s.from, s.to); },
          [&](const Arrow3D& s) {
            return point_segment_distance(from, s.from.head<2>(), s.to.head<2>());
          },
          [&](const Zone& s) {
            return inside_polygon(s.polygon, from) ? 0.0 : polyline_distance(s.polygon, from, true);
          },
          [&](const Marker& s) { return (from - s.at).norm(); },
      },
      annotation.shape);
}

std::vector<Annotation> select_visible_annotations(std::span<const Annotation> annotations,
                                                   const Pose& viewer, std::size_t n_max,
                                                   SessionMs now_ms) {
  struct Ranked {
    const Annotation* annotation;
    double distance;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(annotations.size());
  for (const auto& a : annotations) {
    if (a.created_at <= now_ms) ranked.push_back({&a, ground_distance(a, viewer.ground())});
  }
  const auto key = [](const Ranked& r) {
    return std::make_tuple(-static_cast<long long>(r.annotation->priority), -r.annotation->created_at,
                           r.distance, std::cref(r.annotation->id));
  };
  const std::size_t keep = std::min(n_max, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    [&](const Ranked& a, const Ranked& b) { return key(a) < key(b); });
  std::vector<Annotation> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(*ranked[i].annotation);
  return out;
}

BoardShape minimap_footprint(const Annotation& annotation, const PitchSpec& pitch) {
  return std::visit(
      overloaded{
          [&](const Polyline& s) -> BoardShape { return BoardPolyline{to_board(s.points, pitch)}; },
          [&](const Arrow2D& s) -> BoardShape { return BoardArrow{to_board(s.from, pitch), to_board(s.to, pitch)}; },
          [&](const Arrow3D& s) -> BoardShape {
            return BoardArrow{to_board(GroundPoint(s.from.head<2>()), pitch),
                              to_board(GroundPoint(s.to.head<2>()), pitch)};
          },
          [&](const Zone& s) -> BoardShape { return BoardPolygon{to_board(s.polygon, pitch)}; },
          [&](const Marker& s) -> BoardShape { return BoardMarker{to_board(s.at, pitch), s.text}; },
      },
      annotation.shape);
}

std::vector<FpvItem> fpv_reference(const TacticScene& scene, const EntityId& viewer_id,
                                   const ViewConfig& config, SessionMs now_ms) {
  const auto viewer_it = scene.entities.find(viewer_id);
  if (viewer_it == scene.entities.end()) throw Error(Errc::UnknownEntity, "no entity '" + viewer_id + "'");
  const Pose& viewer = viewer_it->second.pose;

  std::vector<FpvItem> items;
  for (const auto& [id, entity] : scene.entities) {
    if (id == viewer_id) continue;
    // Players are sighted at eye level, props at their ground position.
    const double z = entity.pose.z + (entity.kind == EntityKind::Player ? config.camera.eye_height_m : 0.0);
    const WorldPoint anchor{entity.pose.x, entity.pose.y, z};
    items.push_back({id, "entity", {fpv_project(viewer, config.camera, anchor)}, 0.0});
  }

  std::vector<Annotation> all;
  all.reserve(scene.annotations.size());
  for (const auto& [id, a] : scene.annotations) all.push_back(a);
  for (const auto& a : select_visible_annotations(all, viewer, config.n_max, now_ms)) {
    FpvItem item{a.id, "annotation", {}, 0.0};
    for (const auto& v : annotation_vertices(a)) item.vertices.push_back(fpv_project(viewer, config.camera, v));
    item.size_m = billboard_size(config.base_size_m, ground_distance(a, viewer.ground()), config.d_ref_m);
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace panocoach
