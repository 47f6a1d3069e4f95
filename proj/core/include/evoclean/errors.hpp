#pragma once

#include <stdexcept>
#include <string>

namespace evoclean {

// Error taxonomy maps onto CLI exit codes:
//   ConfigError/ValidationError -> 2, CorpusError -> 3,
//   TransportError/ProtocolError -> 4, everything else -> 5.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Contract violations: out-of-range scores, sequencing gaps, missing
// placeholders, malformed structured output after the re-ask budget.
class ValidationError : public Error {
public:
    using Error::Error;
};

class CorpusError : public Error {
public:
    using Error::Error;
};

// Transport-level failure: attempts exhausted, connection refused.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, int last_status = 0)
        : Error(what), last_status_(last_status) {}
    int last_status() const { return last_status_; }

private:
    int last_status_ = 0;
};

// Endpoint answered but not with a usable chat completion.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Non-retryable request rejection (4xx other than 429).
class RequestError : public Error {
public:
    explicit RequestError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_ = 0;
};

// Scripted mock ran out of steps or a matcher failed; tests must fail loudly.
class FixtureError : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace evoclean
