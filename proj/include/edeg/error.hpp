#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edeg {

/// Invalid arguments or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Undamped normal equations whose condition estimate exceeds the threshold.
class SingularSystemError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Training produced a NaN or infinite loss.
class NonFiniteLossError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Text input rejected by a parser; carries a 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace edeg
