#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace blowup {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The integrand h^{-1/n}(s) s^{1/n-1} is undefined because h(s) <= 0.
class SingularIntegrand : public Error {
 public:
  SingularIntegrand(double s, const std::string& what)
      : Error(what), point_(s) {}
  double point() const noexcept { return point_; }

 private:
  double point_;
};

/// Non-finite value produced by a quadrature or by the right-hand side.
class NumericFailure : public Error {
 public:
  NumericFailure(double location, const std::string& what)
      : Error(what), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

/// The autonomous majorant escapes to infinity before the requested time.
class FiniteEscape : public Error {
 public:
  FiniteEscape(double escape_time, const std::string& what)
      : Error(what), escape_time_(escape_time) {}
  double escape_time() const noexcept { return escape_time_; }

 private:
  double escape_time_;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class InternalConsistency : public Error {
 public:
  using Error::Error;
};

/// Failure inside one stage of a multi-stage run; what() starts with the
/// stage name.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace blowup
