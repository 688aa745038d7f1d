#pragma once

#include <stdexcept>
#include <string>

namespace capbridge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero-area triangles, fold-overs, parallel co-normals.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on input that violates its documented precondition
/// (open mesh for a volume functional, non-triple vertex for co-normals, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Distance-field query outside the sampled domain or at a singular point.
class OutOfDomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Step failures (inverted elements after repeated halving), non-convergent
/// projections, failed remeshing.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

enum class KernelHint { none, tangential_motion, translation };

inline const char* to_string(KernelHint hint) {
  switch (hint) {
    case KernelHint::tangential_motion:
      return "tangential motion";
    case KernelHint::translation:
      return "rigid translation";
    default:
      return "unknown";
  }
}

class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, KernelHint hint)
      : Error(what), hint_(hint) {}
  KernelHint hint() const { return hint_; }

 private:
  KernelHint hint_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field, int line)
      : Error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace capbridge
