// Builders shared by the unit tests.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "panocoach/host.hpp"
#include "panocoach/protocol.hpp"
#include "panocoach/scene.hpp"

namespace testing {

using namespace panocoach;

inline Entity player(const std::string& id, double x = 0.0, double y = 0.0) {
  Entity e;
  e.id = id;
  e.kind = EntityKind::Player;
  e.team = Team::Home;
  e.label = id;
  e.pose = Pose{x, y, 0.0, 0.0};
  return e;
}

inline Command cmd(CommandId id, CommandBody body, ClientId issuer = "coach") {
  return Command{id, std::move(issuer), std::move(body)};
}

inline Annotation marker(const std::string& id, double x, double y, int priority = 0,
                         SessionMs created_at = 0) {
  Annotation a;
  a.id = id;
  a.shape = Marker{GroundPoint(x, y), id};
  a.priority = priority;
  a.created_at = created_at;
  a.author = "coach";
  return a;
}

/// Keeps every frame sent per connection, decoded.
struct RecordingTransport : Transport {
  std::map<ConnId, std::vector<Envelope>> sent;
  std::set<ConnId> closed;

  void send(ConnId conn, std::string frame) override { sent[conn].push_back(decode_frame(frame)); }
  void close(ConnId conn) override { closed.insert(conn); }

  template <typename M>
  std::vector<M> of(ConnId conn) const {
    std::vector<M> out;
    if (const auto it = sent.find(conn); it != sent.end()) {
      for (const auto& env : it->second) {
        if (const auto* m = std::get_if<M>(&env.payload)) out.push_back(*m);
      }
    }
    return out;
  }
  std::vector<Envelope> deltas(ConnId conn) const {
    std::vector<Envelope> out;
    if (const auto it = sent.find(conn); it != sent.end()) {
      for (const auto& env : it->second) {
        if (std::holds_alternative<msg::Delta>(env.payload)) out.push_back(env);
      }
    }
    return out;
  }
};

inline std::string frame(msg::Hello hello) { return encode_frame(Envelope{std::nullopt, 0, "client", hello}); }
inline std::string frame(CommandId id, CommandBody body) {
  return encode_frame(Envelope{std::nullopt, 0, "client", msg::Command{id, std::move(body)}});
}
inline std::string frame(Payload payload) { return encode_frame(Envelope{std::nullopt, 0, "client", std::move(payload)}); }

}  // namespace testing
