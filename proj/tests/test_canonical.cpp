#include <doctest.h>

#include "panocoach/canonical.hpp"
#include "support.hpp"

using namespace panocoach;

TEST_CASE("canonical numbers round to 1e-6 and print shortest") {
  CHECK(canonical_number(105.0) == "105");
  CHECK(canonical_number(0.1) == "0.1");
  CHECK(canonical_number(-0.0) == "0");
  CHECK(canonical_number(-1e-9) == "0");
  CHECK(canonical_number(1.23456789) == "1.234568");
  CHECK(canonical_number(-52.5) == "-52.5");
  CHECK(canonical_number(1e-6) == "0.000001");
  CHECK(canonical_number(123456.0000004) == "123456");
}

TEST_CASE("canonical text sorts keys and keeps integers exact") {
  const Json j = Json::parse(R"({"b":1,"a":[2.50,{"z":null,"y":true}],"c":"x\"y"})");
  CHECK(canonical_text(j) == R"({"a":[2.5,{"y":true,"z":null}],"b":1,"c":"x\"y"})");
  CHECK(canonical_text(Json(18446744073709551615ULL)) == "18446744073709551615");
}

TEST_CASE("FNV-1a 64 reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("empty full-size scene has the frozen golden digest") {
  const TacticScene scene = make_scene(PitchSpec{105.0, 68.0});
  CHECK(canonical_text(scene) ==
        R"({"active_plans":[],"annotations":[],"entities":[],"mode":"Lecture",)"
        R"("pitch":{"length_m":105,"width_m":68},"sequence":null,"version":0})");
  // Computed once with an independent FNV-1a over the string above.
  CHECK(scene_hash(scene) == "229afd14fd16814a");
}

TEST_CASE("scene JSON round trip preserves the hash") {
  TacticScene s = make_scene();
  s.entities["p1"] = testing::player("p1", 1.25, -3.5);
  s.annotations["m1"] = testing::marker("m1", 4, 4, 2, 100);
  Annotation arrow;
  arrow.id = "a3";
  arrow.shape = Arrow3D{WorldPoint(0, 0, 0), WorldPoint(10, 5, 3)};
  s.annotations["a3"] = arrow;
  s.active_plans["p1"] = retarget("p1", s.entities["p1"].pose, GroundPoint(20, 0), 40, SessionMode::Lecture);
  TacticSequence seq;
  seq.id = "drill";
  seq.tracks["p1"] = {{0, GroundPoint(0, 0)}, {500, GroundPoint(3, 1)}};
  s.sequence = LoadedSequence{seq, Playback{Playback::State::Playing, 1.5, 20.0, 33}};
  s.version = 12;

  const TacticScene back = scene_from_json(Json::parse(scene_to_json(s).dump()));
  CHECK(back == s);
  CHECK(scene_hash(back) == scene_hash(s));
}
