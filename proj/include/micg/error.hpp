#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace micg {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or schema.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Numerical routine failed (non-convergence, blow-up, singular system).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed expression text. `token()` is 1-based; the end of input counts as a token.
class SyntaxError : public ValidationError {
public:
    SyntaxError(const std::string &message, std::size_t token, std::size_t offset)
        : ValidationError("syntax error at token " + std::to_string(token) + " (offset " +
                          std::to_string(offset) + "): " + message),
          token_{token}, offset_{offset} {}

    std::size_t token() const noexcept { return token_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t token_;
    std::size_t offset_;
};

} // namespace micg
