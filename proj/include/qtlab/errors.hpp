#pragma once

#include <stdexcept>
#include <string>

namespace qtlab {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user input (config file, CLI arguments, malformed specs).
struct ConfigError : Error {
  using Error::Error;
};

// Numerical operation failed or was asked for something outside its domain.
struct ComputeError : Error {
  using Error::Error;
};

// Filesystem trouble.
struct IoError : Error {
  using Error::Error;
};

struct NoBarrier : ComputeError {
  using ComputeError::ComputeError;
};
struct MultiBump : ComputeError {
  using ComputeError::ComputeError;
};
struct NonDecaying : ComputeError {
  using ComputeError::ComputeError;
};
struct TurningPointRegion : ComputeError {
  using ComputeError::ComputeError;
};
struct Overflow : ComputeError {
  using ComputeError::ComputeError;
};
struct PhaseWrap : ComputeError {
  using ComputeError::ComputeError;
};
struct ChannelAboveBarrier : ComputeError {
  using ComputeError::ComputeError;
};
struct NoConvergence : ComputeError {
  using ComputeError::ComputeError;
};
struct GridTooCoarse : ComputeError {
  using ComputeError::ComputeError;
};
struct NonDecayingInput : ComputeError {
  using ComputeError::ComputeError;
};
struct BranchAmbiguity : ComputeError {
  using ComputeError::ComputeError;
};
struct BoxTooSmall : ComputeError {
  using ComputeError::ComputeError;
};
struct UnstableStep : ComputeError {
  using ComputeError::ComputeError;
};
struct NoTransmission : ComputeError {
  using ComputeError::ComputeError;
};
struct Divergent : ComputeError {
  using ComputeError::ComputeError;
};

}
