#pragma once

#include <stdexcept>
#include <string>

namespace rppg {

// Failure taxonomy shared by the library and the CLI. The CLI maps input
// problems to exit code 2 and analysis problems to exit code 3.
enum class Errc {
  TooShort,
  ZeroMeanChannel,
  LengthMismatch,
  ZeroVariance,
  NyquistViolation,
  EmptyBand,
  OutOfBand,
  NonPositiveMean,
  MissingSidecar,
  CorruptFrame,
  DimensionMismatch,
  EmptyMask,
  BadLandmarks,
  TooSmall,
  TooShortRecording,
  MissingReference,
  DegenerateLandmarks,
  InvalidSpec,
  NoRegions,
  SingleClass,
  InsufficientData,
  NoConvergence,
  BadFeatureTable,
  BadModel,
  EmptyMatrix,
  BadConfig,
  IoFailure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::TooShort: return "TooShort";
    case Errc::ZeroMeanChannel: return "ZeroMeanChannel";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::NyquistViolation: return "NyquistViolation";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::OutOfBand: return "OutOfBand";
    case Errc::NonPositiveMean: return "NonPositiveMean";
    case Errc::MissingSidecar: return "MissingSidecar";
    case Errc::CorruptFrame: return "CorruptFrame";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::BadLandmarks: return "BadLandmarks";
    case Errc::TooSmall: return "TooSmall";
    case Errc::TooShortRecording: return "TooShortRecording";
    case Errc::MissingReference: return "MissingReference";
    case Errc::DegenerateLandmarks: return "DegenerateLandmarks";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::NoRegions: return "NoRegions";
    case Errc::SingleClass: return "SingleClass";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::BadFeatureTable: return "BadFeatureTable";
    case Errc::BadModel: return "BadModel";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::BadConfig: return "BadConfig";
    case Errc::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

// True for problems with user-supplied inputs (files, arguments, data shape);
// false for failures arising while analyzing otherwise valid input.
inline bool is_input_error(Errc c) {
  switch (c) {
    case Errc::ZeroMeanChannel:
    case Errc::ZeroVariance:
    case Errc::EmptyBand:
    case Errc::OutOfBand:
    case Errc::NonPositiveMean:
    case Errc::DegenerateLandmarks:
    case Errc::NoConvergence:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& where, const std::string& detail)
      : std::runtime_error(where + ": " + errc_name(code) + ": " + detail),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& where,
                              const std::string& detail) {
  throw Error(code, where, detail);
}

}  // namespace rppg
