#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpmcf {

enum class ErrorKind {
  TooFewVertices,
  DegenerateEdge,
  ZeroVolume,
  StepRejected,
  NoProgress,
  IndexOutOfRange,
  MeshChanged,
  QueryOutOfRange,
  BetaTooLarge,
  PointNotReached,
  Inconclusive,
  EmptyWindow,
  NoSingularity,
  NonNegativeTau,
  NormalizationFailed,
  AxisSingularity,
  UnsupportedSegment,
  ParameterDomain,
  NotBalanced,
  BadParameters,
  UnknownSuite,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TooFewVertices: return "TooFewVertices";
    case ErrorKind::DegenerateEdge: return "DegenerateEdge";
    case ErrorKind::ZeroVolume: return "ZeroVolume";
    case ErrorKind::StepRejected: return "StepRejected";
    case ErrorKind::NoProgress: return "NoProgress";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::MeshChanged: return "MeshChanged";
    case ErrorKind::QueryOutOfRange: return "QueryOutOfRange";
    case ErrorKind::BetaTooLarge: return "BetaTooLarge";
    case ErrorKind::PointNotReached: return "PointNotReached";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::NoSingularity: return "NoSingularity";
    case ErrorKind::NonNegativeTau: return "NonNegativeTau";
    case ErrorKind::NormalizationFailed: return "NormalizationFailed";
    case ErrorKind::AxisSingularity: return "AxisSingularity";
    case ErrorKind::UnsupportedSegment: return "UnsupportedSegment";
    case ErrorKind::ParameterDomain: return "ParameterDomain";
    case ErrorKind::NotBalanced: return "NotBalanced";
    case ErrorKind::BadParameters: return "BadParameters";
    case ErrorKind::UnknownSuite: return "UnknownSuite";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vpmcf
