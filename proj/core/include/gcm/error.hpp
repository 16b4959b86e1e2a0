#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gcm {

// Every error raised by the library derives from gcm::Error. The category
// decides how a front end reports it (the CLI maps it to an exit code).
enum class ErrorCategory {
  kUsage,      // invalid argument or configuration
  kData,       // malformed input, dataset structure, dimension mismatch
  kNumerical,  // non-finite values, solver breakdown
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Out-of-range scalar parameter (epsilon <= 0, delta < 0, lambda outside
// [0, 1], ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::kUsage, what) {}
};

// A configuration that cannot be trained or evaluated, e.g. an empty class
// with a nonzero loss weight.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kUsage, what) {}
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t actual)
      : Error(ErrorCategory::kData,
              "dimension mismatch: expected " + std::to_string(expected) +
                  ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::kNumerical, what) {}
};

// Structural problems found while building or loading a dataset.
enum class DataErrorKind {
  kMalformedRecord,
  kMixedLabelGroup,
  kMissingKey,
  kMultipleKeys,
  kKeyOnNegative,
  kUnsortedGroups,
  kBadHeader,
  kEmptyGroup,
  kIo,
};

const char* to_string(DataErrorKind kind) noexcept;

class DataError : public Error {
 public:
  // `line` is 1-based for text input, the 0-based record index for binary
  // input, or -1 when no location applies. `group_id` is -1 when no group
  // is involved.
  DataError(DataErrorKind kind, const std::string& detail,
            std::int64_t line = -1, std::int64_t group_id = -1);

  DataErrorKind kind() const noexcept { return kind_; }
  std::int64_t line() const noexcept { return line_; }
  std::int64_t group_id() const noexcept { return group_id_; }

 private:
  DataErrorKind kind_;
  std::int64_t line_;
  std::int64_t group_id_;
};

}  // namespace gcm
