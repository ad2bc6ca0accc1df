#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npqv {

// Base of every error the library throws. The CLI maps PromiseViolation to
// exit code 3 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Exhaustive oracles refuse inputs beyond their size limit.
class RefusalError : public Error {
public:
    using Error::Error;
};

// Chernoff bounds are only defined when T_C > T_S.
class OrderingError : public Error {
public:
    using Error::Error;
};

class PromiseViolation : public Error {
public:
    using Error::Error;
};

} // namespace npqv
