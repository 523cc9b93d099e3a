// SPDX-License-Identifier: Apache-2.0
#include "panocoach/files.hpp"

#include <fstream>
#include <sstream>

#include "panocoach/error.hpp"
#include "panocoach/geometry.hpp"

namespace panocoach {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedBody, what); }

double number(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number()) {
    malformed(std::string("expected number '") + key + "'");
  }
  return j[key].get<double>();
}

std::string text(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    malformed(std::string("expected string '") + key + "'");
  }
  return j[key].get<std::string>();
}

}  // namespace

Formation formation_from_json(const Json& j) {
  Formation formation;
  if (!j.is_object() || !j.contains("pitch") || !j.contains("players") || !j["players"].is_array()) {
    malformed("formation needs 'pitch' and 'players'");
  }
  formation.pitch = pitch_from_json(j["pitch"]);
  for (const auto& p : j["players"]) {
    FormationSlot slot;
    slot.id = text(p, "id");
    slot.label = p.contains("label") ? text(p, "label") : slot.id;
    if (p.contains("team") && !p["team"].is_null()) {
      const std::string team = text(p, "team");
      if (team == "Home") {
        slot.team = Team::Home;
      } else if (team == "Away") {
        slot.team = Team::Away;
      } else {
        malformed("unknown team '" + team + "'");
      }
    }
    slot.uv = {number(p, "u"), number(p, "v")};
    if ((slot.uv.array() < 0.0).any() || (slot.uv.array() > 1.0).any()) {
      malformed("player '" + slot.id + "' lies off the board");
    }
    formation.players.push_back(std::move(slot));
  }
  return formation;
}

Json formation_to_json(const Formation& formation) {
  Json players = Json::array();
  for (const auto& p : formation.players) {
    players.push_back({{"id", p.id},
                       {"label", p.label},
                       {"team", p.team ? Json(to_string(*p.team)) : Json(nullptr)},
                       {"u", p.uv.x()},
                       {"v", p.uv.y()}});
  }
  return {{"pitch", pitch_to_json(formation.pitch)}, {"players", std::move(players)}};
}

Json sequence_file_to_json(const TacticSequence& seq, const PitchSpec& pitch) {
  Json tracks = Json::object();
  for (const auto& [id, track] : seq.tracks) {
    Json keys = Json::array();
    for (const auto& k : track) {
      const BoardPoint uv = world_to_board(k.point, pitch).point;
      keys.push_back(Json::array({k.t_ms, uv.x(), uv.y()}));
    }
    tracks[id] = std::move(keys);
  }
  return {{"id", seq.id}, {"name", seq.name}, {"tracks", std::move(tracks)}, {"warnings", seq.warnings}};
}

TacticSequence sequence_file_from_json(const Json& j, const PitchSpec& pitch) {
  // Same layout as the world form, so parse then map every point.
  TacticSequence seq = sequence_from_json(j);
  for (auto& [id, track] : seq.tracks) {
    for (auto& k : track) k.point = board_to_world(k.point, pitch);
  }
  return seq;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json j = Json::parse(buffer.str(), nullptr, false);
  if (j.is_discarded()) malformed(path.string() + " is not valid structured text");
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content << '\n';
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
}

}  // namespace panocoach
