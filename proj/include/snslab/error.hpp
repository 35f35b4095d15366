#pragma once

#include <stdexcept>
#include <string>

namespace snslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two states live on different bases.
class BasisMismatch : public InvalidArgument {
 public:
  BasisMismatch() : InvalidArgument("states live on different spectral bases") {}
};

/// Non-finite values appeared while integrating; carries the step start time.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t)
      : Error(what + " at t=" + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace snslab
