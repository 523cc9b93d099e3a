// SPDX-License-Identifier: Apache-2.0
#include "panocoach/session_log.hpp"

#include <chrono>
#include <ctime>
#include <istream>
#include <ostream>

#include "json_fields.hpp"
#include "panocoach/canonical.hpp"
#include "panocoach/error.hpp"

namespace panocoach {

std::string_view to_string(LogRecord::Kind kind) {
  return kind == LogRecord::Kind::Delta ? "delta" : "pose_relay";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

Json log_header_to_json(const LogHeader& header) {
  return {{"created_at", header.created_at},
          {"format_version", header.format_version},
          {"pitch", pitch_to_json(header.pitch)}};
}

Json log_record_to_json(const LogRecord& record) {
  return {{"body", effect_to_json(record.delta.effect)},
          {"kind", to_string(record.kind)},
          {"seq", record.delta.seq},
          {"session_time_ms", record.delta.session_time_ms}};
}

void SessionLogWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(Errc::LogWriteFailure, "session log write failed");
}

void SessionLogWriter::write_header(const LogHeader& header) { write_line(log_header_to_json(header).dump()); }

void SessionLogWriter::append(const LogRecord& record) { write_line(log_record_to_json(record).dump()); }

namespace {

LogHeader header_from_line(const std::string& line) {
  using namespace json_fields;
  const Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded()) throw CorruptLogError(0, "header is not valid structured text");
  try {
    LogHeader header;
    header.pitch = pitch_from_json(field(j, "pitch"));
    header.created_at = get_string(j, "created_at");
    header.format_version = static_cast<int>(get_int(j, "format_version"));
    if (header.format_version != kLogFormatVersion) {
      throw CorruptLogError(0, "unsupported format_version " + std::to_string(header.format_version));
    }
    if (!is_valid(header.pitch)) throw CorruptLogError(0, "header pitch is invalid");
    return header;
  } catch (const CorruptLogError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptLogError(0, std::string("bad header: ") + e.what());
  }
}

LogRecord record_from_line(const std::string& line, std::size_t index) {
  using namespace json_fields;
  const Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded()) throw CorruptLogError(index, "not valid structured text");
  try {
    LogRecord record;
    const std::string kind = get_string(j, "kind");
    if (kind == "delta") {
      record.kind = LogRecord::Kind::Delta;
    } else if (kind == "pose_relay") {
      record.kind = LogRecord::Kind::PoseRelay;
    } else {
      throw CorruptLogError(index, "unknown record kind '" + kind + "'");
    }
    record.delta.seq = get_uint(j, "seq");
    record.delta.session_time_ms = get_int(j, "session_time_ms");
    record.delta.effect = effect_from_json(field(j, "body"));
    return record;
  } catch (const CorruptLogError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptLogError(index, e.what());
  }
}

}  // namespace

SessionLog read_session_log(std::istream& in) {
  SessionLog log;
  std::string line;
  if (!std::getline(in, line)) throw CorruptLogError(0, "missing header line");
  log.header = header_from_line(line);
  Seq previous_seq = 0;
  SessionMs previous_time = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t index = log.records.size();
    LogRecord record = record_from_line(line, index);
    if (record.delta.seq != previous_seq + 1) {
      throw CorruptLogError(index, "seq jumps from " + std::to_string(previous_seq) + " to " +
                                       std::to_string(record.delta.seq));
    }
    if (record.delta.session_time_ms < previous_time) {
      throw CorruptLogError(index, "session time goes backwards");
    }
    previous_seq = record.delta.seq;
    previous_time = record.delta.session_time_ms;
    log.records.push_back(std::move(record));
  }
  return log;
}

TacticScene replay_scene(const SessionLog& log) { return replay_scene(log, log.records.size()); }

TacticScene replay_scene(const SessionLog& log, std::size_t record_count) {
  TacticScene scene = make_scene(log.header.pitch);
  const std::size_t n = std::min(record_count, log.records.size());
  for (std::size_t i = 0; i < n; ++i) {
    const StateDelta& delta = log.records[i].delta;
    if (delta.seq != scene.version + 1) throw CorruptLogError(i, "seq does not follow the scene version");
    scene = apply_delta(std::move(scene), delta);
  }
  return scene;
}

std::string replay_verify(std::istream& in) { return scene_hash(replay_scene(read_session_log(in))); }

std::vector<TimedSample> entity_samples(const SessionLog& log, const EntityId& id) {
  std::vector<TimedSample> out;
  for (const auto& record : log.records) {
    const double t = static_cast<double>(record.delta.session_time_ms);
    if (const auto* upsert = std::get_if<EntityUpsert>(&record.delta.effect)) {
      if (upsert->entity.id == id) out.push_back({t, upsert->entity.pose.ground()});
    } else if (const auto* update = std::get_if<PoseUpdate>(&record.delta.effect)) {
      for (const auto& [entity, pose] : update->poses) {
        if (entity == id) out.push_back({t, pose.ground()});
      }
    }
  }
  return out;
}

std::optional<SessionMs> first_playback_start(const SessionLog& log) {
  for (const auto& record : log.records) {
    const auto* change = std::get_if<PlaybackChange>(&record.delta.effect);
    if (change && change->playback.state == Playback::State::Playing) return record.delta.session_time_ms;
  }
  return std::nullopt;
}

}  // namespace panocoach
