#pragma once

#include <stdexcept>
#include <string>

namespace rfspec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied parameters or arguments that violate a precondition.
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// A computation could not be completed with the required accuracy.
class NumericalError : public Error {
  public:
    using Error::Error;
};

#define RFSPEC_DEFINE_ERROR(Name, Base)                                        \
    class Name : public Base {                                                 \
      public:                                                                  \
        explicit Name(const std::string &what) : Base(#Name ": " + what) {}    \
    }

RFSPEC_DEFINE_ERROR(SingularMatrix, NumericalError);
RFSPEC_DEFINE_ERROR(Overflow, NumericalError);
RFSPEC_DEFINE_ERROR(NoConvergence, NumericalError);
RFSPEC_DEFINE_ERROR(MaxSubdivisions, NumericalError);
RFSPEC_DEFINE_ERROR(DegenerateSteadyState, NumericalError);
RFSPEC_DEFINE_ERROR(NonUniqueSteadyState, NumericalError);
RFSPEC_DEFINE_ERROR(NonConvergence, NumericalError);
RFSPEC_DEFINE_ERROR(StepInstability, NumericalError);
RFSPEC_DEFINE_ERROR(InvalidQuantumNumbers, InvalidInput);
RFSPEC_DEFINE_ERROR(GramNotRealizable, InvalidInput);

#undef RFSPEC_DEFINE_ERROR

} // namespace rfspec
