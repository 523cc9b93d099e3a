// SPDX-License-Identifier: Apache-2.0
// Strict field readers shared by the decoders. Every failure is
// Error(MalformedBody).
#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "panocoach/codec.hpp"
#include "panocoach/error.hpp"

namespace panocoach::json_fields {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] inline void malformed(const std::string& what) { throw Error(Errc::MalformedBody, what); }

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) malformed(std::string("expected object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing field '") + key + "'");
  return *it;
}

inline double as_double(const Json& j, const char* what) {
  if (!j.is_number()) malformed(std::string("'") + what + "' must be a number");
  return j.get<double>();
}

inline double get_double(const Json& j, const char* key) { return as_double(field(j, key), key); }

inline std::int64_t get_int(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      malformed(std::string("'") + key + "' out of range");
    }
    return static_cast<std::int64_t>(u);
  }
  if (!v.is_number_integer()) malformed(std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t get_uint(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned()) malformed(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string get_string(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) malformed(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

inline const Json& get_array(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) malformed(std::string("'") + key + "' must be an array");
  return v;
}

// Name lookups throw InvalidArgument; on the decode path that is a malformed body.
template <typename F>
auto named(const Json& j, const char* key, F&& parse) {
  const std::string name = get_string(j, key);
  try {
    return parse(name);
  } catch (const Error&) {
    malformed(std::string("bad value for '") + key + "': " + name);
  }
}

}  // namespace panocoach::json_fields
