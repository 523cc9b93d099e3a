// SPDX-License-Identifier: Apache-2.0
#include "panocoach/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Core>

#include "panocoach/assignment.hpp"
#include "panocoach/error.hpp"
#include "panocoach/geometry.hpp"

namespace panocoach {

namespace {

struct Path {
  EntityId id;
  GroundPoint from;
  GroundPoint to;
  double delay_ms = 0.0;

  double length() const { return (to - from).norm(); }
};

Track to_track(const Path& path, double duration_ms) {
  Track track{{0.0, path.from}};
  if (path.delay_ms > 0.0) track.push_back({path.delay_ms, path.from});
  track.push_back({path.delay_ms + duration_ms, path.to});
  return track;
}

bool moving_at(const Track& track, double t0, double t1) {
  // true if the track moves anywhere inside (t0, t1)
  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    if (track[i].point == track[i + 1].point) continue;
    if (track[i].t_ms < t1 && track[i + 1].t_ms > t0) return true;
  }
  return false;
}

}  // namespace

double closest_moving_approach(const Track& a, const Track& b) {
  std::set<double> cuts;
  for (const auto& k : a) cuts.insert(k.t_ms);
  for (const auto& k : b) cuts.insert(k.t_ms);
  double best = std::numeric_limits<double>::infinity();
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const double t0 = *it;
    const double t1 = *std::next(it);
    if (!moving_at(a, t0, t1) && !moving_at(b, t0, t1)) continue;
    // Both tracks are linear on [t0, t1]; minimize |r0 + s * dr| for s in [0, 1].
    const GroundPoint r0 = sample_track(a, t0).ground() - sample_track(b, t0).ground();
    const GroundPoint r1 = sample_track(a, t1).ground() - sample_track(b, t1).ground();
    const GroundPoint dr = r1 - r0;
    const double len_sq = dr.squaredNorm();
    const double s = len_sq > 0.0 ? std::clamp(-r0.dot(dr) / len_sq, 0.0, 1.0) : 0.0;
    best = std::min(best, (r0 + s * dr).norm());
  }
  return best;
}

TacticSequence generate_transition(const Formation& from, const Formation& to, double v_max_mps,
                                   double r_min_m, const PitchSpec& pitch,
                                   const TransitionOptions& options) {
  if (!(v_max_mps > 0.0)) throw Error(Errc::InvalidArgument, "v_max must be positive");
  using TeamKey = std::optional<Team>;
  std::map<TeamKey, std::vector<const FormationSlot*>> movers, slots;
  for (const auto& p : from.players) movers[p.team].push_back(&p);
  for (const auto& p : to.players) slots[p.team].push_back(&p);
  for (const auto& [team, group] : movers) {
    const auto it = slots.find(team);
    if (it == slots.end() || it->second.size() != group.size()) {
      throw Error(Errc::CountMismatch, "formations have different player counts per team");
    }
  }
  if (movers.size() != slots.size()) {
    throw Error(Errc::CountMismatch, "formations have different player counts per team");
  }

  std::vector<Path> paths;
  for (const auto& [team, group] : movers) {
    const auto& targets = slots.at(team);
    const auto n = static_cast<Eigen::Index>(group.size());
    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        cost(i, j) = (board_to_world(group[i]->uv, pitch) - board_to_world(targets[j]->uv, pitch)).norm();
      }
    }
    const auto assignment = optimal_assignment(cost);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto* target = targets[assignment.permutation[i]];
      paths.push_back({group[i]->id, board_to_world(group[i]->uv, pitch), board_to_world(target->uv, pitch)});
    }
  }
  std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < paths.size(); ++i) {
    if (paths[i].id == paths[i - 1].id) throw Error(Errc::InvalidArgument, "duplicate player id " + paths[i].id);
  }

  double longest = 0.0;
  for (const auto& p : paths) longest = std::max(longest, p.length());
  const double duration = std::ceil(travel_duration_ms(longest, {v_max_mps, options.limits.t_min_ms,
                                                                 options.limits.t_max_ms}));

  TacticSequence seq;
  seq.id = options.id;
  seq.name = options.name;

  std::map<std::pair<std::size_t, std::size_t>, int> attempts;
  std::set<std::pair<std::size_t, std::size_t>> unresolved;
  bool changed = r_min_m > 0.0;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < paths.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < paths.size() && !changed; ++j) {
        const auto pair = std::make_pair(i, j);
        if (unresolved.contains(pair)) continue;
        if (!(closest_moving_approach(to_track(paths[i], duration), to_track(paths[j], duration)) < r_min_m)) {
          continue;
        }
        if (attempts[pair] >= options.max_attempts) {
          unresolved.insert(pair);
          seq.warnings.push_back("paths of " + paths[i].id + " and " + paths[j].id + " pass within " +
                                 std::to_string(r_min_m) + " m");
          continue;
        }
        // Stagger the shorter run; a standing player cannot be staggered.
        std::size_t victim = paths[j].length() <= paths[i].length() ? j : i;
        if (paths[victim].length() == 0.0) victim = victim == i ? j : i;
        paths[victim].delay_ms += options.stagger_ms;
        ++attempts[pair];
        changed = true;
      }
    }
  }

  for (const auto& p : paths) seq.tracks.emplace(p.id, to_track(p, duration));
  return seq;
}

}  // namespace panocoach
