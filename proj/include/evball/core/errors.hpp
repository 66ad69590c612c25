#pragma once

#include <stdexcept>
#include <string>

namespace evball::core {

/// Malformed or missing input data (bad file, bad config, empty stream).
/// Maps to CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical routine failed to converge or hit a degenerate system.
/// Maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad command-line usage. Maps to CLI exit code 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evball::core
