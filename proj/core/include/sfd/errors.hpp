#pragma once

#include <stdexcept>
#include <string>

namespace sfd {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain of a formula or operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The profile dropped below the positivity floor before reaching the end of the range.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Adaptive step size underflowed while integrating an ODE.
class ToleranceError : public Error {
public:
    using Error::Error;
};

/// A fitting window is too narrow, too short, or outside the available data.
class WindowError : public Error {
public:
    using Error::Error;
};

/// A query point lies outside the sampled range of a profile.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Radial shooting did not reach a zero crossing.
class NoCrossingError : public Error {
public:
    using Error::Error;
};

/// Newton's method failed on an implicit step; the caller is expected to retry with a smaller step.
class NewtonDivergence : public Error {
public:
    using Error::Error;
};

/// Time step fell below the admissible floor; the run is aborted.
class StepTooSmall : public Error {
public:
    using Error::Error;
};

/// Malformed manifest, CSV or JSON input.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace sfd
