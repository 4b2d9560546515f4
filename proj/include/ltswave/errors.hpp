#ifndef LTSWAVE_ERRORS_HPP
#define LTSWAVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ltswave {

/// Invalid user input: bad mesh size, unsupported degree, malformed config...
/// The CLI maps this to exit code 2.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A mesh or operator could not be built (non-conforming refinement,
/// inconsistent dimensions, singular element).
class AssemblyFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver failed to reach its tolerance.
class NumericFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A time-stepping run left the stability region: the solution became
/// non-finite or its norm grew beyond the configured blow-up factor.
class BlowUpDetected : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A file or directory could not be created, written, or read.
class IoFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace ltswave

#endif
