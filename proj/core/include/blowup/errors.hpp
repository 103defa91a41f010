#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blowup {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed coefficient expression. `offset()` is the byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation outside the domain of a function (log of a non-positive number, a pole, 0^-1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed: quadrature did not converge, a root could not be bracketed,
/// a scheme left its stability region.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace blowup
