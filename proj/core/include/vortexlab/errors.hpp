#pragma once

#include <stdexcept>
#include <string>

namespace vortexlab {

// Bad user input: invalid mesh dimensions, malformed configs, schema
// violations. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: solver non-convergence, corrupted flux, eigensolver
// breakdown. Maps to CLI exit code 2.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Snapshot file problems, one kind per failure mode.
class SnapshotError : public std::runtime_error {
public:
  enum class Kind { ChecksumMismatch, VersionMismatch, Truncated, Malformed };
  SnapshotError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

}  // namespace vortexlab
