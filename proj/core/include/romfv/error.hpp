#pragma once

#include <stdexcept>
#include <string>

namespace romfv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration (case files, overrides, argument preconditions).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent mesh topology/geometry.
class MeshError : public Error {
public:
    using Error::Error;
};

/// Linear/non-linear solver failure, NaN detection, singular reduced systems.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File system and serialisation failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; carries the offending line number.
class ParseError : public IoError {
public:
    ParseError(const std::string& what, std::size_t line)
        : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An upstream pipeline artifact no longer matches its manifest.
class StaleArtifactError : public IoError {
public:
    StaleArtifactError(const std::string& what, std::string stage)
        : IoError(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace romfv
