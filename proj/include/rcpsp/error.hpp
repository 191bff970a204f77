#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rcpsp {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The instance violates a structural invariant (cycle, dangling arc, ...).
class InvalidInstance : public Error {
public:
    explicit InvalidInstance(const std::string& what, std::vector<std::string> details = {})
        : Error(what), details_(std::move(details)) {}

    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    std::vector<std::string> details_;
};

/// An activity list that is not a precedence-feasible permutation.
class InfeasibleList : public Error {
public:
    using Error::Error;
};

/// Rejected arguments to an operator or an invalid solver configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Division guard: every activity has zero duration.
class DegenerateInstance : public Error {
public:
    using Error::Error;
};

/// Text input that cannot be parsed. Line and column are 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        std::string out = "line " + std::to_string(line);
        if (column != 0) out += ", column " + std::to_string(column);
        return out + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
};

/// Exhaustive enumeration would exceed its configured visit cap.
class SizeCapExceeded : public Error {
public:
    using Error::Error;
};

} // namespace rcpsp
