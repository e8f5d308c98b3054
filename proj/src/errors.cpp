#include "bmf/errors.hpp"

namespace bmf {

const char* to_string(Err e) {
  switch (e) {
    case Err::MissingColumn: return "MissingColumn";
    case Err::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Err::GapExceedsLimit: return "GapExceedsLimit";
    case Err::NonFiniteValue: return "NonFiniteValue";
    case Err::NonConstantDam: return "NonConstantDam";
    case Err::InvalidParam: return "InvalidParam";
    case Err::InsufficientHistory: return "InsufficientHistory";
    case Err::InsufficientFuture: return "InsufficientFuture";
    case Err::DegenerateInput: return "DegenerateInput";
    case Err::NonFiniteInput: return "NonFiniteInput";
    case Err::RankDeficiency: return "RankDeficiency";
    case Err::InvalidHyperparam: return "InvalidHyperparam";
    case Err::NonFiniteLoss: return "NonFiniteLoss";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::InsufficientData: return "InsufficientData";
    case Err::TuningFailed: return "TuningFailed";
    case Err::EmptyInput: return "EmptyInput";
    case Err::DegenerateVariance: return "DegenerateVariance";
    case Err::BadConfig: return "BadConfig";
    case Err::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace bmf
