#pragma once

#include <stdexcept>
#include <string>

namespace lbmeq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line of the offending token
/// (0 when the position is unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A scheme or request violates a structural precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A polynomial product exceeded the configured degree cap.
class TruncationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Floating-point path failed: ill-conditioned fit, degenerate slow subspace.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Direct simulation diverged.
class InstabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace lbmeq
