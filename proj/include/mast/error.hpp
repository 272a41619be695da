#pragma once

#include <stdexcept>
#include <string>

namespace mast {

/// Caller passed a value outside an operation's domain (bad range, unknown
/// node, wrong arity).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Graph-level problem such as a cycle or a table with the wrong shape.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evidence has probability zero under the model.
class ImpossibleEvidenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModelTooLargeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. line/column are 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : std::runtime_error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class VersionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stored data disagrees with what it should regenerate to.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mast
