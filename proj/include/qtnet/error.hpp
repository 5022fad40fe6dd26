#pragma once

#include <stdexcept>
#include <string>

namespace qtnet {

// Root of the library's exception hierarchy. Each subclass maps to one CLI
// exit code (see tools/qtnet.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Odd, nonpositive or mismatched matrix dimensions.
class InvalidDimension : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DegeneratePair : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class UnsupportedSize : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace qtnet
