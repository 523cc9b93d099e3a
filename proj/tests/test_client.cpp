#include <doctest.h>

#include "panocoach/canonical.hpp"
#include "panocoach/client.hpp"
#include "support.hpp"

using namespace panocoach;
using namespace testing;

namespace {

struct Harness {
  std::vector<Envelope> outbox;
  SessionClient client{Role::Kind::Observer, std::nullopt,
                       [this](std::string f) { outbox.push_back(decode_frame(f)); }};
  TacticScene server = make_scene();
  std::vector<StateDelta> deltas;

  Harness() {
    for (int i = 0; i < 6; ++i) {
      auto applied = commit_effect(std::move(server), EntityUpsert{player("p" + std::to_string(i), i, 0)}, i * 10);
      server = std::move(applied.scene);
      deltas.push_back(applied.delta);
    }
  }

  static std::string server_frame(Payload p, std::optional<Seq> seq = std::nullopt, SessionMs t = 0) {
    return encode_frame(Envelope{seq, t, "server", std::move(p)});
  }
  void welcome(std::int64_t now = 0) {
    client.received(server_frame(msg::Welcome{"c7", Role::observer(), make_scene(), 0}, Seq{0}), now);
  }
  void deliver(std::size_t i, std::int64_t now) {
    const auto& d = deltas[i];
    client.received(server_frame(msg::Delta{d.seq, d.effect}, d.seq, d.session_time_ms), now);
  }
  std::size_t count(std::string_view kind) const {
    std::size_t n = 0;
    for (const auto& e : outbox) n += kind_name(e.payload) == kind;
    return n;
  }
};

}  // namespace

TEST_CASE("hello is retried until welcomed") {
  Harness h;
  h.client.start(0);
  for (std::int64_t t = 10; t <= 1200; t += 10) h.client.tick(t);
  CHECK(h.count("Hello") == 3);
  h.welcome(1200);
  for (std::int64_t t = 1210; t <= 2000; t += 10) h.client.tick(t);
  CHECK(h.count("Hello") == 3);
  CHECK(h.count("Ping") >= 3);
}

TEST_CASE("commands wait for the welcome") {
  Harness h;
  h.client.start(0);
  const CommandId a = h.client.submit(SetMode{SessionMode::Review}, 0);
  const CommandId b = h.client.submit(SetMode{SessionMode::Lecture}, 0);
  CHECK(a != b);
  CHECK(h.count("Command") == 0);
  CHECK(h.client.queued_commands() == 2);
  h.welcome(5);
  CHECK(h.count("Command") == 2);
  CHECK(std::get<msg::Command>(h.outbox.back().payload).command_id == b);
}

TEST_CASE("reordered deltas are applied in seq order without a snapshot") {
  Harness h;
  h.welcome();
  h.deliver(1, 10);
  h.deliver(2, 10);
  CHECK(h.client.version() == 0);
  h.deliver(0, 20);
  CHECK(h.client.version() == 3);
  h.deliver(1, 20);  // stale duplicate
  CHECK(h.client.stats().deltas_dropped == 1);
  for (std::int64_t t = 20; t < 1000; t += 10) h.client.tick(t);
  CHECK(h.count("SnapshotRequest") == 0);
}

TEST_CASE("a persistent hole triggers a snapshot request, retried until served") {
  Harness h;
  h.welcome();
  h.deliver(0, 0);
  h.deliver(2, 0);  // seq 2 lost
  std::int64_t t = 0;
  for (; t < 290; t += 10) h.client.tick(t);
  CHECK(h.count("SnapshotRequest") == 0);
  for (; t <= 310; t += 10) h.client.tick(t);
  CHECK(h.count("SnapshotRequest") == 1);
  for (; t <= 1400; t += 10) h.client.tick(t);
  CHECK(h.count("SnapshotRequest") == 2);

  TacticScene snap = make_scene();
  for (int i = 0; i < 4; ++i) snap = apply_delta(std::move(snap), h.deltas[i]);
  h.client.received(Harness::server_frame(msg::Snapshot{snap, 4}, Seq{4}), t);
  CHECK(h.client.version() == 4);
  h.deliver(4, t);
  h.deliver(5, t);
  CHECK(h.client.hash() == scene_hash(h.server));
  // An older snapshot is ignored.
  h.client.received(Harness::server_frame(msg::Snapshot{snap, 4}, Seq{4}), t);
  CHECK(h.client.version() == 6);
}

TEST_CASE("a lost trailing delta is noticed through the pong seq hint") {
  Harness h;
  h.welcome();
  for (std::size_t i = 0; i < 5; ++i) h.deliver(i, 0);  // seq 6 lost, nothing follows
  h.client.received(Harness::server_frame(msg::Pong{0, 50}, Seq{6}), 100);
  CHECK(h.client.server_seq_hint() == 6);
  for (std::int64_t t = 100; t <= 450; t += 10) h.client.tick(t);
  CHECK(h.count("SnapshotRequest") == 1);
}

TEST_CASE("pongs feed the clock estimate") {
  Harness h;
  h.welcome();
  CHECK_FALSE(h.client.clock().ready());
  h.client.received(Harness::server_frame(msg::Pong{100, 150}, Seq{0}), 120);
  REQUIRE(h.client.clock().ready());
  CHECK(h.client.clock().offset_ms() == doctest::Approx(40.0));
}

TEST_CASE("bye ends the client and rejects are kept") {
  Harness h;
  h.welcome();
  h.client.received(Harness::server_frame(msg::Reject{3, "AuthorityError"}), 0);
  REQUIRE(h.client.rejects().size() == 1);
  CHECK(h.client.rejects()[0].reason == "AuthorityError");
  h.client.received(Harness::server_frame(msg::Bye{}), 0);
  CHECK(h.client.ended());
  const auto sent = h.outbox.size();
  h.client.tick(10000);
  CHECK(h.outbox.size() == sent);
}
