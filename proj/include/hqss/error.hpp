#pragma once

#include <stdexcept>
#include <string>

namespace hqss {

/// Input violates a documented precondition (range, shape, disjointness).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor or image dimensions do not compose.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// File-system or codec failure while reading or writing data.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset layout problem (missing pair member, mismatched dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration failed schema validation; `key_path()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : std::runtime_error(key_path + ": " + what), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace hqss
