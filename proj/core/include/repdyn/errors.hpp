#pragma once

#include <stdexcept>
#include <string>

namespace repdyn {

// Invalid parameters, mismatched dimensions, malformed input files.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver or decomposition produced an unusable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankError : public NumericalError {
 public:
  RankError(const std::string& what, long numerical_rank)
      : NumericalError(what), rank_(numerical_rank) {}
  long numerical_rank() const noexcept { return rank_; }

 private:
  long rank_;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double blowup_time)
      : NumericalError(what), time_(blowup_time) {}
  double blowup_time() const noexcept { return time_; }

 private:
  double time_;
};

// Argument outside the mathematical domain of an operation (e.g. zero vector).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace repdyn
