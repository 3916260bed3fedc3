#pragma once

#include <stdexcept>
#include <string>

namespace socnav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (unknown key, bad value, missing file).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Tensor or vector dimensions that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

class CheckpointVersionError : public Error {
public:
    CheckpointVersionError(unsigned found, unsigned expected)
        : Error("checkpoint version " + std::to_string(found) + " is not supported (reader expects version " +
                std::to_string(expected) + ")"),
          found_(found), expected_(expected) {}

    unsigned found() const noexcept { return found_; }
    unsigned expected() const noexcept { return expected_; }

private:
    unsigned found_;
    unsigned expected_;
};

class TruncatedFileError : public Error {
public:
    using Error::Error;
};

/// Backward pass called with a cache produced before the last parameter update.
class StaleCacheError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

class InvalidActionError : public Error {
public:
    using Error::Error;
};

class PlacementError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace socnav
