#pragma once

#include <stdexcept>
#include <string>

namespace proofjudge {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid input data: malformed files, records violating invariants.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Bad experiment configuration: unknown prompt ids, conflicting backends.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// A judge query failed permanently (after retries, or a non-transient 4xx).
class BackendError : public Error {
public:
    BackendError(const std::string& msg, int http_status = 0)
        : Error(msg), status(http_status) {}

    /// Last HTTP status seen, 0 when the failure was not HTTP-level.
    int status;
};

/// A metric is undefined on the given inputs (e.g. an empty class).
class MetricError : public Error {
public:
    explicit MetricError(const std::string& msg) : Error(msg) {}
};

}  // namespace proofjudge
