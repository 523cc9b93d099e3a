#include <doctest.h>

#include <random>

#include "panocoach/canonical.hpp"
#include "panocoach/error.hpp"
#include "support.hpp"

using namespace panocoach;
using testing::cmd;
using testing::player;

namespace {

Errc error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

// Random but mostly valid coach command stream.
class CommandGen {
 public:
  explicit CommandGen(std::uint64_t seed) : rng_(seed) {}

  Command next(CommandId id) {
    const int pick = std::uniform_int_distribution<int>(0, 9)(rng_);
    const std::string eid = "p" + std::to_string(std::uniform_int_distribution<int>(0, 7)(rng_));
    switch (pick) {
      case 0:
      case 1: return cmd(id, SpawnEntity{player(eid, coord(50), coord(30))});
      case 2: return cmd(id, RemoveEntity{eid});
      case 3: return cmd(id, TeleportEntity{eid, Pose{coord(50), coord(30), 0.0, coord(3)}});
      case 4:
      case 5: return cmd(id, RetargetEntity{eid, GroundPoint(coord(50), coord(30))});
      case 6: {
        auto a = testing::marker("m" + std::to_string(id % 5), coord(50), coord(30),
                                 std::uniform_int_distribution<int>(0, 3)(rng_));
        return cmd(id, AddAnnotation{a});
      }
      case 7: return cmd(id, RemoveAnnotation{"m" + std::to_string(id % 5)});
      case 8:
        return cmd(id, SetMode{static_cast<SessionMode>(std::uniform_int_distribution<int>(0, 2)(rng_))});
      default: return cmd(id, PlayerPose{eid, Pose{coord(50), coord(30), 0.0, 0.0}});
    }
  }

  // Replays an earlier command id now and then.
  bool repeat() { return std::uniform_int_distribution<int>(0, 9)(rng_) == 0; }

 private:
  double coord(double half) { return std::uniform_real_distribution<double>(-half, half)(rng_); }
  std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("spawn, teleport and retarget examples") {
  auto s0 = make_scene();
  auto spawned = apply_command(s0, cmd(1, SpawnEntity{player("p7")}), 0);
  CHECK(spawned.scene.entities.size() == 1);
  CHECK(spawned.scene.version == 1);
  CHECK(spawned.delta.seq == 1);
  CHECK(std::holds_alternative<EntityUpsert>(spawned.delta.effect));

  auto tele = apply_command(spawned.scene, cmd(2, TeleportEntity{"p7", Pose{10, 5, 0, 0}}), 10);
  CHECK(tele.scene.entities.at("p7").pose == Pose{10, 5, 0, 0});
  CHECK(tele.scene.version == 2);

  auto back = apply_command(tele.scene, cmd(3, TeleportEntity{"p7", Pose{}}), 20);
  auto moved = apply_command(back.scene, cmd(4, RetargetEntity{"p7", GroundPoint(16, 0)}), 100);
  const auto* start = std::get_if<PlanStart>(&moved.delta.effect);
  REQUIRE(start != nullptr);
  CHECK(start->plan.duration_ms == 2000.0);
  CHECK(start->plan.start_ms == 600);  // Lecture adds the anticipation lead
  CHECK(start->cue.ghost == GroundPoint(16, 0));
  // The pose itself does not jump.
  CHECK(moved.scene.entities.at("p7").pose == Pose{});
  CHECK(moved.scene.active_plans.contains("p7"));
}

TEST_CASE("apply_command errors") {
  auto s = apply_command(make_scene(), cmd(1, SpawnEntity{player("p7")}), 0).scene;
  CHECK(error_of([&] { apply_command(s, cmd(2, SpawnEntity{player("p7")}), 0); }) == Errc::DuplicateId);
  CHECK(error_of([&] { apply_command(s, cmd(3, RemoveEntity{"ghost"}), 0); }) == Errc::UnknownEntity);
  CHECK(error_of([&] { apply_command(s, cmd(4, TeleportEntity{"ghost", Pose{}}), 0); }) ==
        Errc::UnknownEntity);

  Annotation line;
  line.id = "l1";
  line.shape = Polyline{{GroundPoint(0, 0)}};
  CHECK(error_of([&] { apply_command(s, cmd(5, AddAnnotation{line}), 0); }) == Errc::InvalidGeometry);

  Annotation bowtie;
  bowtie.id = "z1";
  bowtie.shape = Zone{{GroundPoint(0, 0), GroundPoint(10, 10), GroundPoint(10, 0), GroundPoint(0, 10)}};
  CHECK(error_of([&] { apply_command(s, cmd(6, AddAnnotation{bowtie}), 0); }) == Errc::InvalidGeometry);

  auto far = testing::marker("far", 58.0, 0.0);
  CHECK(error_of([&] { apply_command(s, cmd(7, AddAnnotation{far}), 0); }) == Errc::InvalidGeometry);
  auto edge = testing::marker("edge", 57.5, 39.0);
  CHECK_NOTHROW(apply_command(s, cmd(8, AddAnnotation{edge}), 0));

  CHECK(error_of([&] { apply_command(s, cmd(9, PlaybackControl{}), 0); }) == Errc::NoSequence);
  CHECK(error_of([&] { apply_command(s, cmd(10, TeleportEntity{"p7", Pose{0, 0, -1, 0}}), 0); }) ==
        Errc::InvalidPose);

  Entity ball = player("ball");
  ball.kind = EntityKind::Ball;
  ball.controller = Controller::player_client("c1");
  CHECK(error_of([&] { apply_command(s, cmd(11, SpawnEntity{ball}), 0); }) == Errc::InvalidArgument);
}

TEST_CASE("a repeated command id returns the original delta and changes nothing") {
  auto first = apply_command(make_scene(), cmd(1, SpawnEntity{player("p7")}), 0);
  auto again = apply_command(first.scene, cmd(1, RemoveEntity{"p7"}), 50);
  CHECK_FALSE(again.changed);
  CHECK(again.delta == first.delta);
  CHECK(scene_hash(again.scene) == scene_hash(first.scene));

  // Same id from another issuer is a different command.
  auto other = apply_command(first.scene, cmd(1, SpawnEntity{player("p8")}, "other"), 60);
  CHECK(other.changed);
  CHECK(other.scene.version == 2);
}

TEST_CASE("apply_delta replication contract") {
  TacticScene server = make_scene();
  TacticScene snapshot5;
  std::vector<StateDelta> deltas;
  for (CommandId id = 1; id <= 8; ++id) {
    auto r = apply_command(server, cmd(id, SpawnEntity{player("p" + std::to_string(id), id, 0)}), id);
    server = r.scene;
    deltas.push_back(r.delta);
    if (server.version == 5) snapshot5 = scene_from_json(Json::parse(scene_to_json(server).dump()));
  }
  TacticScene client = snapshot5;
  for (int i = 5; i < 8; ++i) client = apply_delta(client, deltas[i]);
  CHECK(scene_hash(client) == scene_hash(server));

  TacticScene at7 = make_scene();
  for (int i = 0; i < 7; ++i) at7 = apply_delta(at7, deltas[i]);
  StateDelta ten = deltas[7];
  ten.seq = 10;
  CHECK(error_of([&] { apply_delta(at7, ten); }) == Errc::SequenceGap);
  CHECK(apply_delta(at7, deltas[2]) == at7);
}

TEST_CASE("random command streams: idempotency, monotone versions, delta completeness") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    CAPTURE(seed);
    CommandGen gen(seed);
    TacticScene scene = make_scene();
    std::vector<StateDelta> deltas;
    std::vector<Command> issued;
    const int length = 20 + static_cast<int>(seed * 4 % 181);
    for (int i = 0; i < length; ++i) {
      const bool replay = !issued.empty() && gen.repeat();
      const Command c = replay ? issued[static_cast<std::size_t>(i) % issued.size()]
                               : gen.next(static_cast<CommandId>(i + 1));
      const Seq before = scene.version;
      const std::string hash_before = scene_hash(scene);
      try {
        auto r = apply_command(scene, c, i * 40);
        if (r.changed) {
          CHECK(r.scene.version == before + 1);
          deltas.push_back(r.delta);
          issued.push_back(c);
        } else {
          CHECK(r.scene.version == before);
          CHECK(scene_hash(r.scene) == hash_before);
        }
        scene = std::move(r.scene);
      } catch (const Error&) {
        CHECK(scene.version == before);
      }
    }
    TacticScene replica = make_scene();
    for (const auto& d : deltas) replica = apply_delta(replica, d);
    CHECK(scene_hash(replica) == scene_hash(scene));
    CHECK(replica == scene);
  }
}

TEST_CASE("hash sensitivity to pose changes") {
  auto base = apply_command(make_scene(), cmd(1, SpawnEntity{player("p1", 10.0, 5.25)}), 0).scene;
  const std::string h = scene_hash(base);
  for (int component = 0; component < 4; ++component) {
    CAPTURE(component);
    auto bumped = [&](double delta) {
      TacticScene s = base;
      Pose& p = s.entities.at("p1").pose;
      double* fields[] = {&p.x, &p.y, &p.z, &p.yaw};
      *fields[component] += delta;
      return scene_hash(s);
    };
    CHECK(bumped(1e-5) != h);
    CHECK(bumped(2e-5) != h);
    CHECK(bumped(4e-7) == h);
    CHECK(bumped(1e-9) == h);
  }
}

TEST_CASE("insertion order does not affect the hash") {
  TacticScene a = make_scene();
  TacticScene b = make_scene();
  a.entities["p1"] = player("p1", 1, 1);
  a.entities["p2"] = player("p2", 2, 2);
  b.entities["p2"] = player("p2", 2, 2);
  b.entities["p1"] = player("p1", 1, 1);
  CHECK(scene_hash(a) == scene_hash(b));
  CHECK(scene_hash(a) == scene_hash(a));
}

TEST_CASE("sequence playback state machine") {
  TacticSequence seq;
  seq.id = "s";
  seq.tracks["p1"] = {{0, GroundPoint(0, 0)}, {1000, GroundPoint(10, 0)}};
  auto s = apply_command(make_scene(), cmd(1, SpawnEntity{player("p1")}), 0).scene;
  s = apply_command(s, cmd(2, RetargetEntity{"p1", GroundPoint(5, 5)}), 0).scene;
  s = apply_command(s, cmd(3, LoadSequence{seq}), 0).scene;
  REQUIRE(s.sequence);
  CHECK(s.sequence->playback.state == Playback::State::Stopped);

  auto play = apply_command(s, cmd(4, PlaybackControl{PlaybackControl::Action::Play, 2.0, 0}), 100);
  CHECK(play.scene.active_plans.empty());
  CHECK(play.scene.sequence->playback.playhead_at(300, 1000) == 400.0);

  auto pause = apply_command(play.scene, cmd(5, PlaybackControl{PlaybackControl::Action::Pause}), 300);
  CHECK(pause.scene.sequence->playback.playhead_ms == 400.0);
  CHECK(pause.scene.sequence->playback.playhead_at(900, 1000) == 400.0);

  auto seek = apply_command(pause.scene,
                            cmd(6, PlaybackControl{PlaybackControl::Action::Seek, 1.0, 5000}), 900);
  CHECK(seek.scene.sequence->playback.playhead_ms == 1000.0);

  auto stop = apply_command(seek.scene, cmd(7, PlaybackControl{PlaybackControl::Action::Stop}), 950);
  CHECK(stop.scene.sequence->playback.state == Playback::State::Stopped);
  CHECK(stop.scene.sequence->playback.playhead_ms == 0.0);

  CHECK(error_of([&] {
          apply_command(s, cmd(8, PlaybackControl{PlaybackControl::Action::Play, 0.0, 0}), 0);
        }) == Errc::InvalidArgument);
}

TEST_CASE("simple polygon check") {
  CHECK(is_simple_polygon({GroundPoint(0, 0), GroundPoint(1, 0), GroundPoint(0, 1)}));
  CHECK(is_simple_polygon({GroundPoint(0, 0), GroundPoint(4, 0), GroundPoint(4, 4), GroundPoint(2, 1),
                           GroundPoint(0, 4)}));
  CHECK_FALSE(is_simple_polygon({GroundPoint(0, 0), GroundPoint(1, 0)}));
  CHECK_FALSE(is_simple_polygon({GroundPoint(0, 0), GroundPoint(2, 0), GroundPoint(1, 0)}));
  CHECK_FALSE(is_simple_polygon({GroundPoint(0, 0), GroundPoint(1, 1), GroundPoint(1, 0), GroundPoint(0, 1)}));
}
