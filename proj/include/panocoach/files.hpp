// SPDX-License-Identifier: Apache-2.0
//
// On-disk formats exchanged with coaches' tools. Both use board coordinates
// so that files stay valid across pitch sizes.
//
//   formation: {"pitch":{"length_m","width_m"},
//               "players":[{"id","label","team","u","v"}, ...]}
//   sequence:  {"id","name","tracks":{"<entity>":[[t_ms,u,v], ...]},
//               "warnings":[...]}
#pragma once

#include <filesystem>
#include <string>

#include "panocoach/codec.hpp"
#include "panocoach/transition.hpp"

namespace panocoach {

Formation formation_from_json(const Json& j);
Json formation_to_json(const Formation& formation);

/// Converts a world-coordinate sequence into the board-coordinate file form.
Json sequence_file_to_json(const TacticSequence& seq, const PitchSpec& pitch);
TacticSequence sequence_file_from_json(const Json& j, const PitchSpec& pitch);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace panocoach
