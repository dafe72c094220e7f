#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treelc {

/// Malformed input: a code, a file line, a flag value. Carries the offending
/// position (token index or line number) when one exists.
class ValidationError : public std::invalid_argument {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ValidationError(const std::string& what, std::size_t position = npos)
      : std::invalid_argument(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// An edge set that is not a tree (cycle, disconnected, wrong edge count).
class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (e.g. adding an existing edge).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inconsistent experiment or CLI configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while running: I/O, subprocess, corrupt state directory.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace treelc
