#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vqt {

enum class Errc {
  kMissingFile,
  kUnsupportedFormat,
  kCorruptHeader,
  kInvalidArgument,
  kSignalTooShort,
  kNoVoicedRegion,
  kOrderTooHigh,
  kNoGci,
  kZeroFrame,
  kPhaseUnwrapFailure,
  kNoPeakFound,
  kDegenerateFlow,
  kFrameTooShort,
  kEmptyFrameSet,
  kNonFiniteSpectrum,
  kTooFewFrames,
  kDimensionMismatch,
  kEmptyInput,
  kGridMismatch,
  kInsufficientData,
  kEmptyParams,
  kInvalidPreset,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kMissingFile: return "MissingFile";
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kCorruptHeader: return "CorruptHeader";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kSignalTooShort: return "SignalTooShort";
    case Errc::kNoVoicedRegion: return "NoVoicedRegion";
    case Errc::kOrderTooHigh: return "OrderTooHigh";
    case Errc::kNoGci: return "NoGci";
    case Errc::kZeroFrame: return "ZeroFrame";
    case Errc::kPhaseUnwrapFailure: return "PhaseUnwrapFailure";
    case Errc::kNoPeakFound: return "NoPeakFound";
    case Errc::kDegenerateFlow: return "DegenerateFlow";
    case Errc::kFrameTooShort: return "FrameTooShort";
    case Errc::kEmptyFrameSet: return "EmptyFrameSet";
    case Errc::kNonFiniteSpectrum: return "NonFiniteSpectrum";
    case Errc::kTooFewFrames: return "TooFewFrames";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kGridMismatch: return "GridMismatch";
    case Errc::kInsufficientData: return "InsufficientData";
    case Errc::kEmptyParams: return "EmptyParams";
    case Errc::kInvalidPreset: return "InvalidPreset";
  }
  return "Unknown";
}

// All library failures are reported through this exception; code() tells
// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace vqt
