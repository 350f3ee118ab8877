#pragma once

#include <stdexcept>
#include <string>

namespace vgroove {

// Base for every error the library throws. `code()` is a short stable token
// used by the CLI for machine-readable error records.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

// Malformed or inconsistent configuration/input data.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

// Requested etch depth lies beyond the self-terminating depth of the mask.
class UnreachableDepthError : public DomainError {
 public:
  UnreachableDepthError(const std::string& message, double limit_um)
      : DomainError(message), limit_um_(limit_um) {}

  double limit_um() const noexcept { return limit_um_; }

 private:
  double limit_um_;
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& message) : Error("lookup", message) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& message) : Error("fit", message) {}
};

// Measurements exceed what the physical factors allow (fitted factor > 1).
class ModelDeficitError : public Error {
 public:
  ModelDeficitError(const std::string& message, double implied_factor)
      : Error("model_deficit", message), implied_factor_(implied_factor) {}

  double implied_factor() const noexcept { return implied_factor_; }

 private:
  double implied_factor_;
};

}  // namespace vgroove
