#pragma once

#include <stdexcept>
#include <string>

namespace nlpb {

/// Base class of every error raised by the library. `code()` is the short
/// machine-readable tag printed by the CLI as `ERROR <code> <message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Invalid grid, kernel or parameter combination.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("DOMAIN", message) {}
};

class ConfigError : public Error {
 public:
  ConfigError(int line, std::string key, const std::string& message)
      : Error("CONFIG", format(line, key, message)), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(int line, const std::string& key, const std::string& message) {
    std::string out = "line " + std::to_string(line);
    if (!key.empty()) out += " key '" + key + "'";
    return out + ": " + message;
  }

  int line_;
  std::string key_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IO", message) {}
};

/// The implicit step's inner minimizer stopped above its residual tolerance.
class InnerSolveFailed : public Error {
 public:
  InnerSolveFailed(const std::string& message, double residual, int iterations)
      : Error("INNER_SOLVE", message), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// An explicit step increased the p-Dirichlet energy.
class StabilityViolation : public Error {
 public:
  explicit StabilityViolation(const std::string& message) : Error("STABILITY", message) {}
};

class DecayFitDegenerate : public Error {
 public:
  explicit DecayFitDegenerate(const std::string& message) : Error("DECAY_FIT", message) {}
};

/// An iterative eigen-solve did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& message) : Error("CONVERGENCE", message) {}
};

}  // namespace nlpb
