#pragma once

#include <stdexcept>
#include <string>

namespace skipfree {

// Base for everything thrown by the library. CLI maps ConfigError to exit
// code 2 and ModelError (and subclasses) to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ModelError : Error {
  using Error::Error;
};

// (-Q) is not invertible; some state is recurrent.
struct SingularGenerator : ModelError {
  using ModelError::ModelError;
};

// A resolvent-type quantity was requested for a chain whose states are
// not all transient.
struct RecurrentChain : ModelError {
  using ModelError::ModelError;
};

// G(x,0) requested for a branching process without immigration: state 0 is
// absorbing, so the expected occupation there is infinite.
struct MbpAtZero : ModelError {
  using ModelError::ModelError;
};

// A scale-type sequence left the representable range; retry with a smaller
// horizon or in rational mode.
struct Overflow : ModelError {
  using ModelError::ModelError;
};

// Series hit its term cap without meeting the tolerance; signals recurrence
// or a near-critical parameter set.
struct NonConvergent : ModelError {
  using ModelError::ModelError;
};

// Stored table horizon cannot resolve the requested generating-function
// argument to the requested tail tolerance.
struct SeriesTruncation : ModelError {
  using ModelError::ModelError;
};

struct InvalidFamily : ModelError {
  using ModelError::ModelError;
};

// Too many capped paths with the event still undecided; the plain estimate
// would be biased.
struct ExcessiveCapping : ModelError {
  using ModelError::ModelError;
};

// Operation needs a scalar value (typically s0) that has no exact rational
// representation for these parameters.
struct NeedsFloatMode : ModelError {
  using ModelError::ModelError;
};

}  // namespace skipfree
