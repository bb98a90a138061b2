#pragma once

#include <stdexcept>
#include <string>

namespace fkn {

// Exit codes used by the command-line tool. Each error class maps onto one.
enum class ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Invalid argument to a math routine (zero quaternion, negative sigma, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite value or ill-conditioned system met during computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent configuration (sizes, batch lengths, loss cut, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. The message carries the offending line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// API misuse (e.g. backward without a training-mode forward pass).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fkn
