// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panocoach/motion.hpp"
#include "panocoach/scene.hpp"

namespace panocoach {

struct FormationSlot {
  EntityId id;
  std::string label;
  std::optional<Team> team;
  BoardPoint uv = BoardPoint::Constant(0.5);
};

struct Formation {
  PitchSpec pitch;
  std::vector<FormationSlot> players;
};

struct TransitionOptions {
  MotionLimits limits;
  double stagger_ms = 300.0;
  int max_attempts = 5;
  std::string id = "transition";
  std::string name = "formation transition";
};

/// Moves every player of `from` onto a slot of `to` (per team, minimal total
/// running distance), all in straight lines sharing one duration. Paths that
/// pass closer than r_min are staggered; unresolved pairs become warnings.
/// Throws Error(CountMismatch) when team sizes differ.
TacticSequence generate_transition(const Formation& from, const Formation& to, double v_max_mps,
                                   double r_min_m, const PitchSpec& pitch,
                                   const TransitionOptions& options = {});

/// Minimum ground distance between two keyframed tracks over the times when at
/// least one of them is moving; +inf if neither moves.
double closest_moving_approach(const Track& a, const Track& b);

}  // namespace panocoach
