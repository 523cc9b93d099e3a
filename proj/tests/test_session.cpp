#include <doctest.h>

#include <random>
#include <sstream>

#include "panocoach/canonical.hpp"
#include "panocoach/error.hpp"
#include "panocoach/server.hpp"
#include "support.hpp"

using namespace panocoach;
using namespace testing;

namespace {

// conn 1 is always the coach; the session starts at host time 1000.
struct Fixture {
  RecordingTransport net;
  std::ostringstream log;
  SessionServer server{ServerConfig{}, net, &log};

  Fixture() {
    server.connected(1, 1000);
    server.received(1, frame(msg::Hello{Role::Kind::Coach, std::nullopt}), 1000);
  }

  void send(ConnId conn, CommandId id, CommandBody body, std::int64_t now = 1000) {
    server.received(conn, frame(id, std::move(body)), now);
  }

  ConnId join(ConnId conn, Role::Kind kind, std::optional<EntityId> entity = std::nullopt) {
    server.connected(conn, 1000);
    server.received(conn, frame(msg::Hello{kind, std::move(entity)}), 1000);
    return conn;
  }

  void spawn_eleven() {
    for (int i = 0; i < 11; ++i) send(1, 100 + i, SpawnEntity{player("p" + std::to_string(i), 3.0 * i, 10.0)});
  }
};

}  // namespace

TEST_CASE("coach hello activates the session") {
  Fixture f;
  CHECK(f.server.state().phase == SessionState::Phase::Active);
  const auto welcomes = f.net.of<msg::Welcome>(1);
  REQUIRE(welcomes.size() == 1);
  CHECK(welcomes[0].role == Role::coach());
  CHECK(welcomes[0].seq == 0);
  CHECK(welcomes[0].client_id == "c1");
  CHECK(f.server.session_time(1250) == 250);
}

TEST_CASE("late joiner gets a snapshot with all eleven entities") {
  Fixture f;
  f.spawn_eleven();
  f.join(2, Role::Kind::Observer);
  const auto welcomes = f.net.of<msg::Welcome>(2);
  REQUIRE(welcomes.size() == 1);
  CHECK(welcomes[0].snapshot.entities.size() == 11);
  CHECK(welcomes[0].seq == 11);
  CHECK(welcomes[0].snapshot == f.server.scene());
  CHECK(f.net.deltas(2).empty());
}

TEST_CASE("repeated hello re-sends the same seat") {
  Fixture f;
  f.server.received(1, frame(msg::Hello{Role::Kind::Coach, std::nullopt}), 1100);
  const auto welcomes = f.net.of<msg::Welcome>(1);
  REQUIRE(welcomes.size() == 2);
  CHECK(welcomes[1].client_id == welcomes[0].client_id);
  CHECK(f.server.state().clients.size() == 1);
}

TEST_CASE("second coach is refused") {
  Fixture f;
  f.join(2, Role::Kind::Coach);
  const auto rejects = f.net.of<msg::Reject>(2);
  REQUIRE(rejects.size() == 1);
  CHECK(rejects[0].reason == "InvalidTransition");
  CHECK(f.net.of<msg::Welcome>(2).empty());
}

TEST_CASE("player seat requires an existing player entity") {
  Fixture f;
  f.join(2, Role::Kind::Player, "nobody");
  REQUIRE(f.net.of<msg::Reject>(2).size() == 1);
  CHECK(f.net.of<msg::Reject>(2)[0].reason == "UnknownEntity");

  f.spawn_eleven();
  f.join(3, Role::Kind::Player, "p4");
  REQUIRE(f.net.of<msg::Welcome>(3).size() == 1);
  const auto& p4 = f.server.scene().entities.at("p4");
  CHECK(p4.controller == Controller::player_client(f.net.of<msg::Welcome>(3)[0].client_id));
  // The controller change is a replicated delta.
  const auto deltas = f.net.deltas(1);
  CHECK(std::holds_alternative<EntityUpsert>(std::get<msg::Delta>(deltas.back().payload).effect));
}

TEST_CASE("duplicate command is broadcast once") {
  Fixture f;
  f.join(2, Role::Kind::Observer);
  f.send(1, 7, SpawnEntity{player("a")});
  f.send(1, 7, SpawnEntity{player("a")});
  CHECK(f.net.deltas(1).size() == 1);
  CHECK(f.net.deltas(2).size() == 1);
  CHECK(f.net.of<msg::Reject>(1).empty());
  CHECK(f.server.scene().version == 1);
}

TEST_CASE("failed command is rejected with the error code") {
  Fixture f;
  f.send(1, 1, RemoveEntity{"ghost"});
  const auto rejects = f.net.of<msg::Reject>(1);
  REQUIRE(rejects.size() == 1);
  CHECK(rejects[0].command_id == 1);
  CHECK(rejects[0].reason == "UnknownEntity");
  CHECK(f.server.scene().version == 0);
}

TEST_CASE("commands before any coach, or without one, are gated") {
  RecordingTransport net;
  SessionServer server(ServerConfig{}, net);
  server.connected(5, 0);
  server.received(5, frame(msg::Hello{Role::Kind::Observer, std::nullopt}), 0);
  server.received(5, frame(1, SetMode{SessionMode::Review}), 0);
  REQUIRE(net.of<msg::Reject>(5).size() == 1);
  CHECK(net.of<msg::Reject>(5)[0].reason == "NotActive");

  Fixture f;
  f.join(2, Role::Kind::Observer);
  f.server.disconnected(1, 1200);
  f.send(2, 1, SetMode{SessionMode::Review}, 1200);
  REQUIRE(f.net.of<msg::Reject>(2).size() == 1);
  CHECK(f.net.of<msg::Reject>(2)[0].reason == "NoCoach");
}

TEST_CASE("unwelcomed connection cannot command") {
  Fixture f;
  f.server.connected(9, 1000);
  f.send(9, 1, SpawnEntity{player("x")});
  REQUIRE(f.net.of<msg::Reject>(9).size() == 1);
  CHECK(f.net.of<msg::Reject>(9)[0].reason == "NotWelcomed");
}

TEST_CASE("authority soundness under random commands") {
  Fixture f;
  f.spawn_eleven();
  f.join(2, Role::Kind::Observer);
  f.join(3, Role::Kind::Player, "p0");
  std::mt19937_64 rng(17);
  const std::vector<SessionMode> modes{SessionMode::Lecture, SessionMode::Rehearsal, SessionMode::Review};
  CommandId next = 1000;
  for (int round = 0; round < 300; ++round) {
    const SessionMode mode = modes[rng() % 3];
    if (f.server.scene().mode != mode) f.send(1, next++, SetMode{mode});
    const std::vector<CommandBody> bodies{
        SpawnEntity{player("x" + std::to_string(round))},
        RemoveEntity{"p" + std::to_string(1 + rng() % 10)},
        TeleportEntity{"p1", Pose{1.0, 2.0, 0.0, 0.0}},
        RetargetEntity{"p2", GroundPoint(5.0, 5.0)},
        AddAnnotation{marker("m" + std::to_string(round), 1.0, 1.0)},
        SetMode{SessionMode::Review},
        PlaybackControl{},
        PlayerPose{"p0", Pose{1.0, 1.0, 0.0, 0.0}},
        PlayerPose{"p1", Pose{1.0, 1.0, 0.0, 0.0}},
    };
    const ConnId conn = 2 + rng() % 2;
    const CommandBody& body = bodies[rng() % bodies.size()];
    const Seq before = f.server.scene().version;
    const std::size_t rejects_before = f.net.of<msg::Reject>(conn).size();
    f.send(conn, next++, body);
    const Role role = conn == 2 ? Role::observer() : Role::player("p0");
    const bool allowed = authority_check(role, mode, body).allowed;
    if (!allowed) {
      CHECK(f.server.scene().version == before);
      REQUIRE(f.net.of<msg::Reject>(conn).size() == rejects_before + 1);
      CHECK(f.net.of<msg::Reject>(conn).back().reason == "AuthorityError");
    } else {
      // Only a player's own pose gets through, and it is buffered, not committed.
      CHECK(std::holds_alternative<PlayerPose>(body));
      CHECK(f.server.scene().version == before);
    }
  }
}

TEST_CASE("plan start precedes tick poses, which follow sample_motion") {
  Fixture f;
  f.send(1, 1, SpawnEntity{player("a", 0.0, 0.0)});
  f.send(1, 2, RetargetEntity{"a", GroundPoint(16.0, 0.0)}, 1100);
  const MotionPlan plan = f.server.scene().active_plans.at("a");
  for (std::int64_t t = 1100; t <= 5000; t += 33) f.server.tick(t);
  CHECK(f.server.scene().active_plans.empty());
  CHECK(f.server.quiescent());

  const auto deltas = f.net.deltas(1);
  bool started = false;
  bool ended = false;
  Seq prev_seq = 0;
  SessionMs prev_time = 0;
  std::size_t pose_count = 0;
  SessionMs last_pose_time = -1;
  for (const auto& env : deltas) {
    const auto& d = std::get<msg::Delta>(env.payload);
    CHECK(d.seq == prev_seq + 1);
    CHECK(env.session_time_ms >= prev_time);
    prev_seq = d.seq;
    prev_time = env.session_time_ms;
    if (std::holds_alternative<PlanStart>(d.effect)) started = true;
    if (std::holds_alternative<PlanEnd>(d.effect)) ended = true;
    if (const auto* update = std::get_if<PoseUpdate>(&d.effect)) {
      CHECK(started);
      CHECK_FALSE(ended);
      CHECK(env.session_time_ms > last_pose_time);
      last_pose_time = env.session_time_ms;
      for (const auto& [id, pose] : update->poses) {
        const Pose want = sample_motion(plan, static_cast<double>(env.session_time_ms));
        CHECK(std::abs(pose.x - want.x) <= 1e-6);
        CHECK(std::abs(pose.y - want.y) <= 1e-6);
        CHECK(std::abs(pose.yaw - want.yaw) <= 1e-6);
        ++pose_count;
      }
    }
  }
  CHECK(started);
  CHECK(ended);
  CHECK(pose_count > 10);
  const auto& a = f.server.scene().entities.at("a");
  CHECK(a.pose.x == doctest::Approx(16.0));
}

TEST_CASE("ticks never go backwards") {
  Fixture f;
  f.send(1, 1, SpawnEntity{player("a")});
  f.send(1, 2, RetargetEntity{"a", GroundPoint(4.0, 0.0)});
  f.server.tick(1200);
  const Seq after = f.server.scene().version;
  f.server.tick(1100);
  f.server.tick(1200);
  CHECK(f.server.scene().version == after);
}

TEST_CASE("player poses are relayed at most every 100 ms") {
  Fixture f;
  f.spawn_eleven();
  f.send(1, 50, SetMode{SessionMode::Rehearsal});
  f.join(2, Role::Kind::Player, "p3");
  for (std::int64_t t = 1000; t <= 2000; t += 10) {
    f.send(2, static_cast<CommandId>(t), PlayerPose{"p3", Pose{t / 100.0, 1.0, 0.0, 0.0}}, t);
    f.server.tick(t);
  }
  std::vector<SessionMs> relays;
  for (const auto& env : f.net.deltas(1)) {
    const auto& d = std::get<msg::Delta>(env.payload);
    if (const auto* update = std::get_if<PoseUpdate>(&d.effect)) {
      for (const auto& [id, pose] : update->poses) {
        if (id == "p3") relays.push_back(env.session_time_ms);
      }
    }
  }
  REQUIRE(relays.size() >= 9);
  CHECK(relays.size() <= 11);
  for (std::size_t i = 1; i < relays.size(); ++i) CHECK(relays[i] - relays[i - 1] >= kPoseRelayIntervalMs);
  // The latest pose wins.
  CHECK(f.server.scene().entities.at("p3").pose.x == doctest::Approx(relays.back() / 100.0 + 10.0));
}

TEST_CASE("sequence playback runs to the end and pauses") {
  Fixture f;
  f.send(1, 1, SpawnEntity{player("a")});
  TacticSequence seq;
  seq.id = "s";
  seq.tracks["a"] = {{0.0, GroundPoint(0.0, 0.0)}, {1000.0, GroundPoint(10.0, 0.0)}};
  f.send(1, 2, LoadSequence{seq});
  f.send(1, 3, PlaybackControl{PlaybackControl::Action::Play, 2.0, 0.0}, 1000);
  for (std::int64_t t = 1010; t <= 2000; t += 10) f.server.tick(t);
  const auto& loaded = *f.server.scene().sequence;
  CHECK(loaded.playback.state == Playback::State::Paused);
  CHECK(loaded.playback.playhead_ms == doctest::Approx(1000.0));
  CHECK(f.server.scene().entities.at("a").pose.x == doctest::Approx(10.0));
  CHECK(f.server.quiescent());
}

TEST_CASE("ping, snapshot request and bye") {
  Fixture f;
  f.send(1, 1, SpawnEntity{player("a")});
  f.join(2, Role::Kind::Observer);
  f.server.received(2, frame(msg::Ping{42}), 1500);
  const auto& pong_env = f.net.sent[2].back();
  REQUIRE(std::holds_alternative<msg::Pong>(pong_env.payload));
  CHECK(std::get<msg::Pong>(pong_env.payload) == msg::Pong{42, 500});
  CHECK(pong_env.seq == Seq{1});

  f.server.received(2, frame(msg::SnapshotRequest{}), 1500);
  const auto snaps = f.net.of<msg::Snapshot>(2);
  REQUIRE(snaps.size() == 1);
  CHECK(snaps[0].seq == 1);
  CHECK(snaps[0].scene == f.server.scene());

  f.server.received(2, frame(msg::Bye{}), 1600);
  CHECK(f.net.closed.contains(2));
  CHECK_FALSE(f.server.finished());

  f.join(3, Role::Kind::Observer);
  f.server.received(1, frame(msg::Bye{}), 1700);
  CHECK(f.server.finished());
  CHECK(f.net.of<msg::Bye>(3).size() == 1);
  CHECK(f.net.closed.contains(1));
  CHECK(f.net.closed.contains(3));
}

TEST_CASE("malformed frames are dropped") {
  Fixture f;
  const auto before = f.net.sent[1].size();
  f.server.received(1, "garbage", 1100);
  f.server.received(1, std::string("\0\0\0\2{}", 6), 1100);
  CHECK(f.net.sent[1].size() == before);
  CHECK_FALSE(f.server.finished());
}

TEST_CASE("log write failure ends the session with bye") {
  Fixture f;
  f.join(2, Role::Kind::Observer);
  f.log.setstate(std::ios::badbit);
  f.send(1, 1, SpawnEntity{player("a")});
  CHECK(f.server.finished());
  CHECK(f.net.of<msg::Bye>(1).size() == 1);
  CHECK(f.net.of<msg::Bye>(2).size() == 1);
  CHECK(f.net.deltas(2).empty());
}

TEST_CASE("server config validation") {
  ServerConfig c;
  c.tick_hz = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c.tick_hz = 121;
  CHECK_THROWS_AS(validate(c), Error);
  c.tick_hz = 120;
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("fpv reference endpoint body") {
  Fixture f;
  f.send(1, 1, SpawnEntity{player("a", 0.0, 0.0)});
  f.send(1, 2, SpawnEntity{player("b", 10.0, 0.0)});
  const Json body = f.server.fpv_reference_json("a", 1000);
  CHECK(body["entity_id"] == "a");
  REQUIRE(body["items"].size() == 1);
  CHECK(body["items"][0]["id"] == "b");
  CHECK(body["items"][0]["vertices"][0]["x"].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(f.server.fpv_reference_json("zzz", 1000), Error);
}
