#pragma once

#include <stdexcept>
#include <string>

namespace sartre {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NumericalFailure,
    Parse,
    Config,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(ErrorKind::DimensionMismatch, what) {}
};

class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what) : Error(ErrorKind::NumericalFailure, what) {}
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(ErrorKind::Parse, line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace sartre
