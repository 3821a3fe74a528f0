#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardmeta {

/// Broad failure class; maps one-to-one onto CLI exit codes.
enum class ErrorKind {
  kConfig,     // exit 2
  kData,       // exit 3
  kNumerical,  // exit 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

/// A malformed record in a line-oriented file. `line` is 1-based.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& reason)
      : DataError(source + ":" + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised by align() when corpus and embedding ids differ as sets.
class AlignmentError : public DataError {
 public:
  enum class Kind { kMissingEmbedding, kOrphanEmbedding };

  AlignmentError(Kind kind, std::vector<std::string> ids);

  Kind alignment_kind() const noexcept { return kind_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  Kind kind_;
  std::vector<std::string> ids_;
};

class InsufficientSenses : public DataError {
 public:
  InsufficientSenses(std::size_t eligible, std::size_t required)
      : DataError("insufficient senses: " + std::to_string(eligible) +
                  " eligible non-metaphorical senses with >= 2 instances, "
                  "batch needs " + std::to_string(required)),
        eligible_(eligible),
        required_(required) {}

  std::size_t eligible() const noexcept { return eligible_; }
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t eligible_;
  std::size_t required_;
};

class NonFiniteLoss : public NumericalError {
 public:
  explicit NonFiniteLoss(std::size_t step)
      : NumericalError("non-finite loss at step " + std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kData:
      return 3;
    case ErrorKind::kNumerical:
      return 4;
  }
  return 1;
}

}  // namespace hardmeta
