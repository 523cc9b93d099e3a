// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace panocoach {

enum class Errc {
  UnknownEntity,
  DuplicateId,
  InvalidGeometry,
  InvalidPose,
  NoSequence,
  SequenceGap,
  NonSquare,
  NonFinite,
  CountMismatch,
  EmptyActual,
  LengthMismatch,
  UnknownKind,
  MalformedBody,
  InvalidTransition,
  CorruptLog,
  BindFailure,
  LogWriteFailure,
  InvalidArgument,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by log replay; carries the zero-based index of the first bad record.
class CorruptLogError : public Error {
 public:
  CorruptLogError(std::size_t record_index, const std::string& what)
      : Error(Errc::CorruptLog, "record " + std::to_string(record_index) + ": " + what),
        record_index_(record_index) {}

  std::size_t record_index() const noexcept { return record_index_; }

 private:
  std::size_t record_index_;
};

}  // namespace panocoach
