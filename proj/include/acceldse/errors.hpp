#pragma once

#include <stdexcept>
#include <string>

namespace acceldse {

// Raised for malformed input documents (JSON syntax, unknown keys, bad types).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for structurally valid but semantically inconsistent inputs
// (negative dims, impossible allocations, missing cost entries, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a simulation cannot proceed (unmappable layer, overflowing
// register file, empty design space, ...).
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace acceldse
