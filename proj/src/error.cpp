#include "ossvm/error.hpp"

namespace ossvm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InfeasibleLambda: return "InfeasibleLambda";
    case ErrorKind::DegenerateBias: return "DegenerateBias";
    case ErrorKind::EscalationFailed: return "EscalationFailed";
    case ErrorKind::ClassTooSmall: return "ClassTooSmall";
    case ErrorKind::NotEnoughClasses: return "NotEnoughClasses";
    case ErrorKind::AllRejected: return "AllRejected";
    case ErrorKind::NoKnownSamples: return "NoKnownSamples";
    case ErrorKind::NoUnknownSamples: return "NoUnknownSamples";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ossvm
