#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghz {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Syntax/lexical failure while parsing an expression string.
// Carries the byte offset of the failure and the token set that
// would have been accepted there.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset,
               std::vector<std::string> expected = {})
        : Error(msg + " (offset " + std::to_string(offset) + ")"),
          offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

// Runtime failure while evaluating an expression (division by zero,
// 0^negative, ...). Carries the source offset of the offending node.
class EvalError : public Error {
public:
    EvalError(const std::string& msg, std::size_t offset)
        : Error(msg + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Bad configuration: invalid coefficient set, malformed config file,
// inconsistent run parameters. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical failure: solver did not converge, positivity lost,
// bound violated, non-hyperbolic spectrum, ... CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

// Filesystem failure. CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ghz
