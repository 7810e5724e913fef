#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contrasolver {

// Bad caller input: out-of-range confidences, unknown nodes, self-pairs.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A record in an input file could not be parsed or failed validation.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::size_t written = 0)
        : std::runtime_error(what), written_(written) {}

    // Records fully written before the failure.
    std::size_t written() const noexcept { return written_; }

private:
    std::size_t written_;
};

// Raised when the solver detects a broken internal invariant. Always a bug.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace contrasolver
