#pragma once

#include <stdexcept>
#include <string>

namespace nilflow {

// Bad input that the caller could have checked up front (CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical guard tripped during a computation (CLI exit code 3).
class NumericalGuard : public std::runtime_error {
 public:
  NumericalGuard(std::string guard, const std::string& what)
      : std::runtime_error(guard + ": " + what), guard_(std::move(guard)) {}
  const std::string& guard() const noexcept { return guard_; }

 private:
  std::string guard_;
};

#define NILFLOW_VALIDATION_ERROR(Name)                   \
  class Name : public ValidationError {                  \
   public:                                               \
    explicit Name(const std::string& w)                  \
        : ValidationError(std::string(#Name ": ") + w) {} \
  };

#define NILFLOW_GUARD_ERROR(Name)                                        \
  class Name : public NumericalGuard {                                   \
   public:                                                               \
    explicit Name(const std::string& w) : NumericalGuard(#Name, w) {}    \
  };

NILFLOW_VALIDATION_ERROR(InvalidFrame)
NILFLOW_VALIDATION_ERROR(NonTransversal)
NILFLOW_VALIDATION_ERROR(LabelMismatch)
NILFLOW_VALIDATION_ERROR(GridTooCoarse)
NILFLOW_VALIDATION_ERROR(GridOverflow)

NILFLOW_GUARD_ERROR(DegenerateFrame)
NILFLOW_GUARD_ERROR(DomainExceeded)
NILFLOW_GUARD_ERROR(NonAnalytic)
NILFLOW_GUARD_ERROR(NonPositiveAlpha)
NILFLOW_GUARD_ERROR(InsufficientSignal)
NILFLOW_GUARD_ERROR(InsufficientSamples)
NILFLOW_GUARD_ERROR(RootFinderFailure)

#undef NILFLOW_VALIDATION_ERROR
#undef NILFLOW_GUARD_ERROR

}  // namespace nilflow
