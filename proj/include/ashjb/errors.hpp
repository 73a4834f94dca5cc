/**
 * @file errors.hpp
 * @brief Exception types shared by all modules.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace ashjb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A configuration object violates its invariants. `path` names the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A numerical solve could not proceed (step-size limits, inconsistent inputs).
class SolverError : public Error {
public:
    using Error::Error;
};

/// The requested operation is not available for this model.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace ashjb
