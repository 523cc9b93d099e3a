// SPDX-License-Identifier: Apache-2.0
//
// Deterministic in-process network simulator. One server and scripted
// clients exchange real frames over virtual links on a simulated clock.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "panocoach/codec.hpp"
#include "panocoach/scene.hpp"
#include "panocoach/server.hpp"

namespace panocoach {

/// Seeded generator whose output depends only on the seed (std distributions
/// are implementation-defined, so they are not used).
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  std::uint64_t bits() { return engine_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct LinkModel {
  double latency_mean_ms = 0.0;
  double latency_jitter_ms = 0.0;  ///< std dev of a normal, truncated at 0
  double loss_prob = 0.0;
  std::uint64_t seed = 0;
};

/// Throws Error(InvalidArgument) for negative latency/jitter or loss outside [0, 1].
void validate(const LinkModel& link);

struct ScriptEntry {
  std::int64_t t_ms = 0;
  CommandBody body;
};

using Script = std::vector<ScriptEntry>;

/// Line-delimited {"body":{...},"t_ms":...} records, t_ms non-decreasing.
Script read_script(std::istream& in);
void write_script(std::ostream& out, const Script& script);

/// Spawns, then a motion phase (retargets, a sequence, teleports, annotations),
/// then a review phase of at least 6 s with no motion, so the scene is at rest
/// by the last command.
Script make_drill_script(std::uint64_t seed, std::size_t n_commands, const PitchSpec& pitch = {});

struct SimOptions {
  int tick_hz = 30;
  std::int64_t client_tick_ms = 10;
  PitchSpec pitch;
  /// Receives the server's session log when set.
  std::ostream* log = nullptr;
};

struct ConvergenceReport {
  bool converged = false;
  std::optional<std::int64_t> time_to_converge_ms;
  std::int64_t last_command_ms = 0;
  std::string server_hash;
  Seq server_seq = 0;
  std::vector<std::string> client_hashes;  ///< coach first
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_dropped = 0;
  std::uint64_t sent_to_clients = 0;
  std::uint64_t dropped_to_clients = 0;
  std::uint64_t snapshots_requested = 0;
  std::uint64_t rejects = 0;

  bool operator==(const ConvergenceReport&) const = default;
};

Json report_to_json(const ConvergenceReport& report);

/// Runs a coach executing `script` plus `n_clients` observers. Gives up
/// `timeout_ms` of simulated time after the last script command.
ConvergenceReport run_scenario(const LinkModel& link, std::size_t n_clients, const Script& script,
                               std::int64_t timeout_ms, const SimOptions& options = {});

}  // namespace panocoach
