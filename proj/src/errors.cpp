// SPDX-License-Identifier: Apache-2.0
#include "panocoach/error.hpp"

namespace panocoach {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnknownEntity: return "UnknownEntity";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::InvalidGeometry: return "InvalidGeometry";
    case Errc::InvalidPose: return "InvalidPose";
    case Errc::NoSequence: return "NoSequence";
    case Errc::SequenceGap: return "SequenceGap";
    case Errc::NonSquare: return "NonSquare";
    case Errc::NonFinite: return "NonFinite";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::EmptyActual: return "EmptyActual";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::MalformedBody: return "MalformedBody";
    case Errc::InvalidTransition: return "InvalidTransition";
    case Errc::CorruptLog: return "CorruptLog";
    case Errc::BindFailure: return "BindFailure";
    case Errc::LogWriteFailure: return "LogWriteFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace panocoach
