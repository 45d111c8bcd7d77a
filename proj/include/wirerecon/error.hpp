#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wirerecon {

enum class Errc {
  DegenerateProjection,
  RankDeficient,
  CoincidentCenters,
  ZeroLine,
  InsufficientPoints,
  DegenerateConfiguration,
  IndexOutOfRange,
  OutOfDomain,
  DegenerateCurve,
  TooFewPoints,
  SolveFailure,
  NonMonotoneInput,
  NoMatches,
  PointAtInfinity,
  NonUniformSpacing,
  UnreachableConstraint,
  NonConvergence,
  ParseError,
  SchemaMismatch,
  InvalidArgument,
  IoError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DegenerateProjection: return "DegenerateProjection";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::CoincidentCenters: return "CoincidentCenters";
    case Errc::ZeroLine: return "ZeroLine";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::DegenerateCurve: return "DegenerateCurve";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::SolveFailure: return "SolveFailure";
    case Errc::NonMonotoneInput: return "NonMonotoneInput";
    case Errc::NoMatches: return "NoMatches";
    case Errc::PointAtInfinity: return "PointAtInfinity";
    case Errc::NonUniformSpacing: return "NonUniformSpacing";
    case Errc::UnreachableConstraint: return "UnreachableConstraint";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace wirerecon
