#pragma once

#include <stdexcept>
#include <string>

namespace sentiparse {

// malformed input data (corpus lines, grammar files, weight files)
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid configuration or incompatible artifacts
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// contradictory certain probabilities fed to an evaluator
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// broken internal invariant
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sentiparse
