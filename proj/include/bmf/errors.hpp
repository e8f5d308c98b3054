#pragma once

#include <stdexcept>
#include <string>

namespace bmf {

enum class Err {
  MissingColumn,
  NonMonotonicTimestamp,
  GapExceedsLimit,
  NonFiniteValue,
  NonConstantDam,
  InvalidParam,
  InsufficientHistory,
  InsufficientFuture,
  DegenerateInput,
  NonFiniteInput,
  RankDeficiency,
  InvalidHyperparam,
  NonFiniteLoss,
  ShapeMismatch,
  InsufficientData,
  TuningFailed,
  EmptyInput,
  DegenerateVariance,
  BadConfig,
  IoError,
};

const char* to_string(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  Err kind() const { return kind_; }

 private:
  Err kind_;
};

}  // namespace bmf
