#include <doctest.h>

#include <algorithm>
#include <random>

#include "panocoach/views.hpp"
#include "support.hpp"

using namespace panocoach;
using testing::marker;

namespace {

std::vector<std::string> ids(const std::vector<Annotation>& list) {
  std::vector<std::string> out;
  for (const auto& a : list) out.push_back(a.id);
  return out;
}

}  // namespace

TEST_CASE("under the limit everything is returned in key order") {
  const std::vector<Annotation> list{marker("c", 5, 0, 1, 10), marker("a", 3, 0, 2, 0), marker("b", 1, 0, 1, 20)};
  CHECK(ids(select_visible_annotations(list, Pose{}, 5, 100)) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("equal priority and time: nearest five win") {
  std::vector<Annotation> list;
  for (int i = 0; i < 6; ++i) list.push_back(marker("m" + std::to_string(i), 5.0 + 9.0 * i, 0));
  std::reverse(list.begin(), list.end());
  CHECK(ids(select_visible_annotations(list, Pose{}, 5, 0)) ==
        std::vector<std::string>{"m0", "m1", "m2", "m3", "m4"});
}

TEST_CASE("priority dominates distance") {
  std::vector<Annotation> list{marker("far", 50, 0, 9)};
  list[0].shape = Marker{GroundPoint(50, 86.6), "far"};  // 100 m away
  for (int i = 0; i < 5; ++i) list.push_back(marker("near" + std::to_string(i), 5, 0, 0));
  CHECK(ids(select_visible_annotations(list, Pose{}, 1, 0)) == std::vector<std::string>{"far"});
  CHECK(select_visible_annotations(list, Pose{}, 0, 0).empty());
}

TEST_CASE("ties break by id and future annotations stay hidden") {
  const std::vector<Annotation> list{marker("b", 1, 0), marker("a", 0, 1), marker("late", 0, 0, 5, 500)};
  CHECK(ids(select_visible_annotations(list, Pose{}, 5, 100)) == std::vector<std::string>{"a", "b"});
  CHECK(ids(select_visible_annotations(list, Pose{}, 5, 500)).front() == "late");
}

TEST_CASE("selection is invariant under input permutation") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(-40, 40);
  std::uniform_int_distribution<int> small(0, 2);
  std::vector<Annotation> list;
  for (int i = 0; i < 40; ++i) {
    list.push_back(marker("m" + std::to_string(i), std::round(coord(rng)), std::round(coord(rng)), small(rng),
                          small(rng) * 10));
  }
  const Pose viewer{3, -2, 0, 0.3};
  const auto expected = ids(select_visible_annotations(list, viewer, 7, 100));
  for (int k = 0; k < 100; ++k) {
    std::shuffle(list.begin(), list.end(), rng);
    CHECK(ids(select_visible_annotations(list, viewer, 7, 100)) == expected);
  }
}

TEST_CASE("ground distance uses the nearest footprint point") {
  Annotation zone;
  zone.id = "z";
  zone.shape = Zone{{GroundPoint(0, 0), GroundPoint(10, 0), GroundPoint(10, 10), GroundPoint(0, 10)}};
  CHECK(ground_distance(zone, GroundPoint(5, 5)) == 0.0);
  CHECK(ground_distance(zone, GroundPoint(13, 14)) == doctest::Approx(5.0));
  Annotation arrow;
  arrow.id = "a";
  arrow.shape = Arrow3D{WorldPoint(0, 0, 2), WorldPoint(10, 0, 5)};
  CHECK(ground_distance(arrow, GroundPoint(5, 3)) == doctest::Approx(3.0));
}

TEST_CASE("minimap footprints") {
  const PitchSpec pitch{105, 68};
  Annotation arrow;
  arrow.id = "a";
  arrow.shape = Arrow3D{WorldPoint(0, 0, 0), WorldPoint(10, 5, 3)};
  const auto board_arrow = std::get<BoardArrow>(minimap_footprint(arrow, pitch));
  CHECK(board_arrow.from == BoardPoint(0.5, 0.5));
  CHECK((board_arrow.to - BoardPoint(0.5 + 10.0 / 105.0, 0.5 + 5.0 / 68.0)).norm() < 1e-15);

  Annotation zone;
  zone.id = "z";
  zone.shape = Zone{{GroundPoint(-52.5, -34), GroundPoint(0, -34), GroundPoint(0, 0)}};
  const auto polygon = std::get<BoardPolygon>(minimap_footprint(zone, pitch));
  REQUIRE(polygon.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((board_to_world(polygon.points[i], pitch) - std::get<Zone>(zone.shape).polygon[i]).norm() < 1e-12);
  }

  const auto m = std::get<BoardMarker>(minimap_footprint(marker("corner", -52.5, -34), pitch));
  CHECK(m.at == BoardPoint(0, 0));
  CHECK(m.text == "corner");
}

TEST_CASE("fpv reference frame") {
  TacticScene scene = make_scene();
  scene.entities["me"] = testing::player("me", 0, 0);
  scene.entities["ahead"] = testing::player("ahead", 10, 0);
  scene.entities["behind"] = testing::player("behind", -10, 0);
  Entity ball = testing::player("ball", 20, 0);
  ball.kind = EntityKind::Ball;
  scene.entities["ball"] = ball;
  scene.annotations["m"] = marker("m", 30, 0, 1);

  const auto items = fpv_reference(scene, "me", ViewConfig{}, 0);
  REQUIRE(items.size() == 4);
  const auto find = [&](const std::string& id) {
    return *std::find_if(items.begin(), items.end(), [&](const FpvItem& i) { return i.id == id; });
  };
  const auto ahead = find("ahead");
  REQUIRE(ahead.vertices.front());
  CHECK(ahead.vertices.front()->x == doctest::Approx(0.0));
  CHECK(ahead.vertices.front()->y == doctest::Approx(0.0));
  CHECK_FALSE(find("behind").vertices.front());
  CHECK(find("ball").vertices.front()->y < 0.0);
  CHECK(find("m").kind == "annotation");
  CHECK(find("m").size_m == doctest::Approx(1.0));
}
