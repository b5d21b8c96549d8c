#pragma once

#include <stdexcept>

namespace pursuit {

/// Malformed or out-of-range configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files, or files that do not parse.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inputs that are well-formed but violate a contract (shape mismatch,
/// missing scores, incompatible artifacts).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pursuit
