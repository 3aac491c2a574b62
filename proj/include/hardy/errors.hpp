#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define HARDY_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                           \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; }  \
  }

HARDY_DEFINE_ERROR(OutOfDomain);
HARDY_DEFINE_ERROR(InvalidWeight);
HARDY_DEFINE_ERROR(ConditionViolated);
HARDY_DEFINE_ERROR(HypothesisViolated);
HARDY_DEFINE_ERROR(ZeroWitness);
HARDY_DEFINE_ERROR(BudgetExceeded);
HARDY_DEFINE_ERROR(NotApplicable);
HARDY_DEFINE_ERROR(RegimeMismatch);
HARDY_DEFINE_ERROR(DegenerateInstance);
HARDY_DEFINE_ERROR(ParseError);

#undef HARDY_DEFINE_ERROR

}  // namespace hardy
