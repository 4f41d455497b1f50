#pragma once

#include <stdexcept>
#include <string>

namespace hss {

// Base for all library errors. `category()` is stable and machine-checkable;
// the CLI maps categories to exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& msg)
      : std::runtime_error(category + " error: " + msg), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

private:
  std::string category_;
};

// Shape disagreement between tensor operands.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& msg) : Error("dimension", msg) {}
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error("numeric", msg) {}
};

// Out-of-range lookup into a table or vector.
class IndexError : public Error {
public:
  explicit IndexError(const std::string& msg) : Error("index", msg) {}
};

// An API precondition was violated by the caller.
class ContractError : public Error {
public:
  explicit ContractError(const std::string& msg) : Error("contract", msg) {}
};

// Bad or self-contradictory run configuration.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

// File system / serialization failure.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error("io", msg) {}
};

// Checkpoint does not match the dataset or model it is applied to.
class CompatibilityError : public Error {
public:
  explicit CompatibilityError(const std::string& msg) : Error("compatibility", msg) {}
};

// Unknown user/item identifier.
class LookupError : public Error {
public:
  explicit LookupError(const std::string& msg) : Error("lookup", msg) {}
};

}  // namespace hss
