// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "panocoach/error.hpp"
#include "panocoach/netsim.hpp"

namespace panocoach {

Script read_script(std::istream& in) {
  Script script;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("t_ms") || !j.contains("body") ||
        !j["t_ms"].is_number_integer()) {
      throw Error(Errc::MalformedBody, "script line " + std::to_string(line_no) + ": expected {\"t_ms\",\"body\"}");
    }
    ScriptEntry entry{j["t_ms"].get<std::int64_t>(), command_body_from_json(j["body"])};
    if (!script.empty() && entry.t_ms < script.back().t_ms) {
      throw Error(Errc::InvalidArgument, "script line " + std::to_string(line_no) + ": t_ms goes backwards");
    }
    script.push_back(std::move(entry));
  }
  return script;
}

void write_script(std::ostream& out, const Script& script) {
  for (const auto& entry : script) {
    out << Json{{"t_ms", entry.t_ms}, {"body", command_body_to_json(entry.body)}}.dump() << '\n';
  }
}

namespace {

constexpr std::int64_t kReviewSpanMs = 6500;

class DrillWriter {
 public:
  DrillWriter(std::uint64_t seed, const PitchSpec& pitch) : rng_(seed), pitch_(pitch) {}

  double in_range(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  GroundPoint spot(double inset = 2.0) {
    return {in_range(-pitch_.length_m / 2 + inset, pitch_.length_m / 2 - inset),
            in_range(-pitch_.width_m / 2 + inset, pitch_.width_m / 2 - inset)};
  }

  Entity spawn(std::size_t i) {
    Entity e;
    if (i < 11) {
      e.id = "p" + std::to_string(i + 1);
      e.kind = EntityKind::Player;
      e.team = Team::Home;
      e.label = std::to_string(i + 1);
    } else if (i == 11) {
      e.id = "ball";
      e.kind = EntityKind::Ball;
      e.height_m = 0.22;
    } else {
      e.id = "cone" + std::to_string(i - 11);
      e.kind = EntityKind::Cone;
      e.height_m = 0.3;
    }
    const GroundPoint p = spot();
    e.pose = Pose{p.x(), p.y(), 0.0, 0.0};
    movable_.push_back(e.id);
    if (e.kind == EntityKind::Player) players_.push_back(e.id);
    return e;
  }

  Annotation annotation(SessionMs t) {
    Annotation a;
    a.id = "a" + std::to_string(next_annotation_++);
    a.priority = static_cast<int>(rng_.below(3));
    a.created_at = t;
    a.author = "c1";
    const GroundPoint c = spot(10.0);
    switch (rng_.below(4)) {
      case 0: a.shape = Marker{c, "note " + a.id}; break;
      case 1: a.shape = Arrow2D{c, spot(10.0)}; break;
      case 2: a.shape = Polyline{{c, spot(10.0), spot(10.0)}}; break;
      default: {
        const double r = in_range(3.0, 8.0);
        const double phase = in_range(0.0, 2.0 * std::numbers::pi);
        Zone z;
        for (int k = 0; k < 3; ++k) {
          const double th = phase + k * 2.0 * std::numbers::pi / 3.0;
          z.polygon.emplace_back(c.x() + r * std::cos(th), c.y() + r * std::sin(th));
        }
        a.shape = z;
      }
    }
    annotations_.push_back(a.id);
    return a;
  }

  std::optional<CommandBody> remove_annotation() {
    if (annotations_.empty()) return std::nullopt;
    const std::size_t k = rng_.below(annotations_.size());
    const AnnotationId id = annotations_[k];
    annotations_.erase(annotations_.begin() + static_cast<std::ptrdiff_t>(k));
    return RemoveAnnotation{id};
  }

  TacticSequence sequence() {
    TacticSequence seq;
    seq.id = "drill" + std::to_string(rng_.below(1000));
    seq.name = "drill";
    const double duration = std::round(in_range(1000.0, 5000.0));
    for (std::size_t k = 0; k < 3 && k < players_.size(); ++k) {
      Track track;
      const int n = 2 + static_cast<int>(rng_.below(3));
      for (int i = 0; i < n; ++i) track.push_back({std::round(duration * i / (n - 1)), spot()});
      seq.tracks[players_[rng_.below(players_.size())]] = track;
    }
    return seq;
  }

  CommandBody motion(SessionMs t) {
    const std::uint64_t roll = rng_.below(100);
    if (roll < 50) return RetargetEntity{pick(movable_), spot()};
    if (roll < 62) {
      const GroundPoint p = spot();
      return TeleportEntity{pick(movable_), Pose{p.x(), p.y(), 0.0, in_range(-3.0, 3.0)}};
    }
    if (roll < 77) return AddAnnotation{annotation(t)};
    if (roll < 85) {
      if (auto removal = remove_annotation()) return *removal;
      return AddAnnotation{annotation(t)};
    }
    if (roll < 90) return SetMode{rng_.below(2) == 0 ? SessionMode::Lecture : SessionMode::Rehearsal};
    if (!sequence_loaded_) {
      sequence_loaded_ = true;
      return LoadSequence{sequence()};
    }
    PlaybackControl pc;
    switch (rng_.below(4)) {
      case 0: pc.action = PlaybackControl::Action::Pause; break;
      case 1:
        pc.action = PlaybackControl::Action::Seek;
        pc.position_ms = std::round(in_range(0.0, 1000.0));
        break;
      default: {
        static constexpr double kRates[] = {1.0, 1.5, 2.0};
        pc.action = PlaybackControl::Action::Play;
        pc.rate = kRates[rng_.below(3)];
      }
    }
    return pc;
  }

  CommandBody review(SessionMs t) {
    switch (rng_.below(3)) {
      case 0: return AddAnnotation{annotation(t)};
      case 1:
        if (auto removal = remove_annotation()) return *removal;
        return AddAnnotation{annotation(t)};
      default: return SetMode{rng_.below(2) == 0 ? SessionMode::Review : SessionMode::Lecture};
    }
  }

  std::int64_t gap(std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng_.below(hi - lo + 1)); }

 private:
  const EntityId& pick(const std::vector<EntityId>& ids) { return ids[rng_.below(ids.size())]; }

  SimRng rng_;
  PitchSpec pitch_;
  std::vector<EntityId> movable_;
  std::vector<EntityId> players_;
  std::vector<AnnotationId> annotations_;
  std::size_t next_annotation_ = 1;
  bool sequence_loaded_ = false;
};

}  // namespace

Script make_drill_script(std::uint64_t seed, std::size_t n_commands, const PitchSpec& pitch) {
  DrillWriter w(seed, pitch);
  Script script;
  std::int64_t t = 0;
  const std::size_t spawns = std::min<std::size_t>(n_commands, 14);
  for (std::size_t i = 0; i < spawns; ++i) {
    script.push_back({t, SpawnEntity{w.spawn(i)}});
    t += 50;
  }
  const std::size_t rest = n_commands - spawns;
  const std::size_t reviews = rest == 0 ? 0 : std::max<std::size_t>(1, rest * 2 / 5);
  const std::size_t motions = rest - reviews;
  for (std::size_t i = 0; i < motions; ++i) {
    script.push_back({t, w.motion(t)});
    t += w.gap(100, 300);
  }
  if (reviews > 0) {
    const auto spacing = std::max<std::int64_t>(200, (kReviewSpanMs + static_cast<std::int64_t>(reviews) - 1) /
                                                         static_cast<std::int64_t>(reviews));
    t = script.back().t_ms;
    for (std::size_t i = 0; i < reviews; ++i) {
      t += spacing;
      script.push_back({t, w.review(t)});
    }
  }
  return script;
}

}  // namespace panocoach
