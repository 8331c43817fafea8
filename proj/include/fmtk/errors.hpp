#pragma once

#include <stdexcept>
#include <string>

namespace fmtk {

// Error taxonomy shared by the whole toolkit. The CLI maps these onto exit
// codes: parse/usage errors -> 2, cap violations -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Malformed input text (structures, formulas, trees, schemes, nested words).
class ParseError : public Error {
public:
    ParseError(std::string msg, int line = 0, int column = 0)
        : Error(line > 0 ? ("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg)
                         : msg),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A configured resource cap (universe size, subset enumeration, cover search)
// would be exceeded. Never downgraded to a silent partial answer.
class CapError : public Error {
public:
    using Error::Error;
};

// A postcondition re-verification failed. Indicates a bug, never user error.
class VerificationError : public Error {
public:
    using Error::Error;
};

}  // namespace fmtk
