// SPDX-License-Identifier: Apache-2.0
#include "panocoach/canonical.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "panocoach/error.hpp"

namespace panocoach {

double canonical_round(double value) {
  const double rounded = std::round(value * 1e6) / 1e6;
  return rounded == 0.0 ? 0.0 : rounded;
}

std::string canonical_number(double value) {
  if (!std::isfinite(value)) throw Error(Errc::InvalidArgument, "non-finite value in canonical form");
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), canonical_round(value),
                                       std::chars_format::fixed);
  if (ec != std::errc{}) throw Error(Errc::InvalidArgument, "number too large for canonical form");
  return {buf.data(), end};
}

namespace {

void render(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      // nlohmann objects are std::map-backed, so iteration is key-sorted.
      for (const auto& [key, item] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        out += Json(key).dump();
        out.push_back(':');
        render(item, out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        render(item, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::number_float:
      out += canonical_number(value.get<double>());
      break;
    default:
      out += value.dump();
      break;
  }
}

}  // namespace

std::string canonical_text(const Json& value) {
  std::string out;
  render(value, out);
  return out;
}

std::string canonical_text(const TacticScene& scene) { return canonical_text(scene_to_json(scene)); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string scene_hash(const TacticScene& scene) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_text(scene))));
  return {buf.data(), 16};
}

}  // namespace panocoach
