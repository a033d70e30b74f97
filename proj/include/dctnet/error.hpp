#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dctnet {

enum class Errc {
  // jpeg
  UnsupportedFrame,
  UnsupportedSampling,
  TruncatedStream,
  BadMarker,
  InvalidHuffmanCode,
  CoefficientIndexOverflow,
  // tensor
  ShapeMismatch,
  AxisOutOfRange,
  NonScalarLoss,
  MissingGradient,
  // transforms
  KOutOfRange,
  GroupingError,
  // model
  GeometryMismatch,
  BadStage,
  ChannelMismatch,
  // harness
  EmptyDataset,
  UnreadablePath,
  CropTooLarge,
  ClassMapMismatch,
  BadConfig,
  BadCheckpoint,
};

std::string_view to_string(Errc code);

// Every recoverable failure in the toolkit is reported as an Error carrying
// a machine-checkable code plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same code, message prefixed with "context: ".
  Error with_context(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  Errc code_;
  std::string detail_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnsupportedFrame: return "UnsupportedFrame";
    case Errc::UnsupportedSampling: return "UnsupportedSampling";
    case Errc::TruncatedStream: return "TruncatedStream";
    case Errc::BadMarker: return "BadMarker";
    case Errc::InvalidHuffmanCode: return "InvalidHuffmanCode";
    case Errc::CoefficientIndexOverflow: return "CoefficientIndexOverflow";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::AxisOutOfRange: return "AxisOutOfRange";
    case Errc::NonScalarLoss: return "NonScalarLoss";
    case Errc::MissingGradient: return "MissingGradient";
    case Errc::KOutOfRange: return "KOutOfRange";
    case Errc::GroupingError: return "GroupingError";
    case Errc::GeometryMismatch: return "GeometryMismatch";
    case Errc::BadStage: return "BadStage";
    case Errc::ChannelMismatch: return "ChannelMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::UnreadablePath: return "UnreadablePath";
    case Errc::CropTooLarge: return "CropTooLarge";
    case Errc::ClassMapMismatch: return "ClassMapMismatch";
    case Errc::BadConfig: return "BadConfig";
    case Errc::BadCheckpoint: return "BadCheckpoint";
  }
  return "Unknown";
}

}  // namespace dctnet
