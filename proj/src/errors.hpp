#pragma once

#include <stdexcept>
#include <string>

namespace tcpa {

// Shape/extent violations on tensor operations.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Violated API preconditions (non-scalar loss, label out of range, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Configuration file / key validation failures.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values encountered during training.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Container load failures, one kind per corruption class.
class IoError : public std::runtime_error {
 public:
  enum class Kind {
    open,
    magic,
    version,
    truncation,
    shape_table,
    label_range,
    value_range,
    write,
  };

  IoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace tcpa
