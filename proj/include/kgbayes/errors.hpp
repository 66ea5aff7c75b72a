#pragma once

#include <stdexcept>
#include <string>

namespace kgbayes {

// Base class for everything this library throws on bad input or bad state.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed text input (CSV, knowledge-base documents, model files).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}
    int line() const { return line_; }

private:
    int line_;
};

// Shape or value violations on otherwise well-formed data.
class DataError : public Error {
public:
    using Error::Error;
};

// Model fitting cannot proceed (e.g. a class has no examples).
class FitError : public Error {
public:
    using Error::Error;
};

// A name (individual, feature, class) is not known to the receiver.
class LookupError : public Error {
public:
    using Error::Error;
};

// Both membership and non-membership became derivable for the same
// individual/feature pair.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace kgbayes
