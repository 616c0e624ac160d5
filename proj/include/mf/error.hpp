#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mf {

// Base of every domain failure. `code()` is a stable machine-readable tag
// that the service puts into error bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Description source rejected by the parser or by the model validator.
// Line numbers are 1-based; 0 means the failure is not tied to a source line
// (a model built in code rather than parsed).
class ParseFailure : public Error {
 public:
  ParseFailure(std::size_t line, std::string reason)
      : Error("ParseFailure", format(line, reason)),
        line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  static std::string format(std::size_t line, const std::string& reason) {
    if (line == 0) return reason;
    return "line " + std::to_string(line) + ": " + reason;
  }

  std::size_t line_;
  std::string reason_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message)
      : Error("SchemaError", message) {}
};

class DuplicateGameName : public Error {
 public:
  explicit DuplicateGameName(const std::string& name)
      : Error("DuplicateGameName", "duplicate game name '" + name + "'") {}
};

class EmptyTransactionList : public Error {
 public:
  EmptyTransactionList()
      : Error("EmptyTransactionList", "no transactions to mine") {}
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& message)
      : Error("InvalidConfig", message) {}
};

// Rule base was mined from a different catalog than the one in use.
class RebuildRequired : public Error {
 public:
  explicit RebuildRequired(const std::string& message)
      : Error("RebuildRequired", message) {}
};

// A session was handed rule bases whose fingerprint does not match its catalog.
class StaleRuleBase : public Error {
 public:
  explicit StaleRuleBase(const std::string& message)
      : Error("StaleRuleBase", message) {}
};

class StaleRecommendation : public Error {
 public:
  StaleRecommendation(unsigned long long expected, unsigned long long actual)
      : Error("StaleRecommendation",
              "revision " + std::to_string(expected) +
                  " does not match current revision " +
                  std::to_string(actual)) {}
};

class MissingElements : public Error {
 public:
  explicit MissingElements(const std::string& message)
      : Error("MissingElements", message) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message) : Error("NotFound", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("InvalidArgument", message) {}
};

}  // namespace mf
