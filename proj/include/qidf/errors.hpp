#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qidf {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record in an input file could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateIdError : public ParseError {
public:
    DuplicateIdError(const std::string& path, std::size_t line, const std::string& id)
        : ParseError(path, line, "duplicate id '" + id + "'"), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation not permitted in the current state of an object (e.g. rescaling twice).
class StateError : public Error {
public:
    using Error::Error;
};

/// Index construction failed.
class BuildError : public Error {
public:
    using Error::Error;
};

/// Binary index file is unreadable, truncated, or of an unsupported version.
class FormatError : public Error {
public:
    using Error::Error;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

} // namespace qidf
