#pragma once

#include <stdexcept>
#include <string>

namespace alloy1d {

/// Base class for every error raised by the library. `name()` is the stable
/// identifier printed by the CLI on the diagnostic stream.
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)), message_(what) {}

  const std::string& name() const noexcept { return name_; }
  /// Message without the error name.
  const std::string& message() const noexcept { return message_; }

  /// Numeric errors (exit code 2) versus input validation errors (exit code 1).
  virtual bool is_numeric() const noexcept { return true; }

private:
  std::string name_;
  std::string message_;
};

/// Malformed input, violated precondition or unreadable file.
class InvalidInput : public Error {
public:
  explicit InvalidInput(const std::string& what) : Error("InvalidInput", what) {}
  bool is_numeric() const noexcept override { return false; }
};

class SingleAtomDistribution : public Error {
public:
  explicit SingleAtomDistribution(const std::string& what)
      : Error("SingleAtomDistribution", what) {}
  bool is_numeric() const noexcept override { return false; }
};

class ScanTooCoarse : public Error {
public:
  explicit ScanTooCoarse(const std::string& what) : Error("ScanTooCoarse", what) {}
};

class TooCloseToEdge : public Error {
public:
  explicit TooCloseToEdge(const std::string& what) : Error("TooCloseToEdge", what) {}
};

class DirichletResonance : public Error {
public:
  explicit DirichletResonance(const std::string& what)
      : Error("DirichletResonance", what) {}
};

class SingularBasis : public Error {
public:
  explicit SingularBasis(const std::string& what) : Error("SingularBasis", what) {}
};

class DegenerateSite : public Error {
public:
  explicit DegenerateSite(const std::string& what) : Error("DegenerateSite", what) {}
};

class InsufficientRange : public Error {
public:
  explicit InsufficientRange(const std::string& what) : Error("InsufficientRange", what) {}
};

class EigenvalueProximity : public Error {
public:
  explicit EigenvalueProximity(const std::string& what)
      : Error("EigenvalueProximity", what) {}
};

}  // namespace alloy1d
