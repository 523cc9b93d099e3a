// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "panocoach/codec.hpp"

namespace panocoach {

/// Rounds to 1e-6 and normalizes negative zero.
double canonical_round(double value);

/// Shortest round-trip fixed-notation rendering of canonical_round(value).
std::string canonical_number(double value);

/// Compact rendering with lexicographically sorted keys and canonical floats.
std::string canonical_text(const Json& value);

/// Canonical serialization of the replicated scene state.
std::string canonical_text(const TacticScene& scene);

std::uint64_t fnv1a64(std::string_view bytes);

/// FNV-1a 64 of the canonical text, as 16 lowercase hex digits.
std::string scene_hash(const TacticScene& scene);

}  // namespace panocoach
