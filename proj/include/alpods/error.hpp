#pragma once

#include <stdexcept>
#include <string>

namespace alpods {

enum class ErrorKind
{
    input,     // invalid argument or precondition violation
    schema,    // missing or duplicated column, bad schema file
    parse,     // malformed cell
    integrity, // data contradicts a table invariant
    io,        // file cannot be read or written
    abstain    // classifier cannot reach a verdict
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool condition, const std::string& what)
{
    if (!condition) {
        throw Error(ErrorKind::input, what);
    }
}

} // namespace alpods
