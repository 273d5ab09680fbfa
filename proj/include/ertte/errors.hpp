#pragma once

#include <stdexcept>
#include <string>

namespace ertte {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, DataError -> 3, StateError -> 4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invariant violations between cooperating components (e.g. a lookup at a
// position older than the stored record).
class ConsistencyError : public StateError {
 public:
  explicit ConsistencyError(const std::string& msg) : StateError(msg) {}
};

}  // namespace ertte
