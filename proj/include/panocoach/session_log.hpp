// SPDX-License-Identifier: Apache-2.0
//
// Append-only session log: one compact structured-text record per line, with
// the header on line 1.
//
//   {"created_at":"2026-03-01T18:00:00Z","format_version":1,"pitch":{...}}
//   {"body":{"type":"EntityUpsert",...},"kind":"delta","seq":1,"session_time_ms":0}
//   {"body":{"type":"PoseUpdate",...},"kind":"pose_relay","seq":2,"session_time_ms":140}
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "panocoach/codec.hpp"
#include "panocoach/scene.hpp"

namespace panocoach {

inline constexpr int kLogFormatVersion = 1;

struct LogHeader {
  PitchSpec pitch;
  std::string created_at;
  int format_version = kLogFormatVersion;
};

struct LogRecord {
  enum class Kind { Delta, PoseRelay };
  Kind kind = Kind::Delta;
  StateDelta delta;
};

std::string_view to_string(LogRecord::Kind kind);

struct SessionLog {
  LogHeader header;
  std::vector<LogRecord> records;
};

/// Current UTC wall clock as an ISO-8601 string.
std::string utc_timestamp();

Json log_header_to_json(const LogHeader& header);
Json log_record_to_json(const LogRecord& record);

/// Writes synchronously and flushes every line; a failed write throws
/// Error(LogWriteFailure).
class SessionLogWriter {
 public:
  explicit SessionLogWriter(std::ostream& out) : out_(out) {}

  void write_header(const LogHeader& header);
  void append(const LogRecord& record);

 private:
  void write_line(const std::string& line);
  std::ostream& out_;
};

/// Parses a whole log. Structural problems, seq gaps and time going backwards
/// throw CorruptLogError with the index of the first bad record.
SessionLog read_session_log(std::istream& in);

/// Scene after applying the records, starting from an empty scene on the
/// header's pitch. Throws CorruptLogError like read_session_log.
TacticScene replay_scene(const SessionLog& log);
TacticScene replay_scene(const SessionLog& log, std::size_t record_count);

/// Ground positions the log records for one entity (spawns, teleports, plan
/// and sequence poses, relayed player poses), in record order.
std::vector<TimedSample> entity_samples(const SessionLog& log, const EntityId& id);

/// Session time of the first PlaybackChange into Playing, if any.
std::optional<SessionMs> first_playback_start(const SessionLog& log);

/// Verify mode: applies every record at infinite speed and returns the final
/// scene hash.
std::string replay_verify(std::istream& in);

}  // namespace panocoach
