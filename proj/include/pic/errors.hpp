#pragma once

#include <stdexcept>
#include <string>

namespace pic {

// Bad wiring: unknown profile, missing capability, contradictory flags.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition (empty claim set, k = 0, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Transient failure (429, 5xx, transport). The gateway retries these; it
// surfaces only once the retry budget is exhausted.
class RetryableError : public std::runtime_error {
public:
    explicit RetryableError(const std::string& msg, int status = 0, int retry_after_ms = 0)
        : std::runtime_error(msg), status_(status), retry_after_ms_(retry_after_ms) {}
    int status() const { return status_; }
    int retry_after_ms() const { return retry_after_ms_; }

private:
    int status_;
    int retry_after_ms_;
};

// Backend rejected the request for good (4xx other than 429). Not retried.
class PermanentError : public std::runtime_error {
public:
    explicit PermanentError(const std::string& msg, int status = 0)
        : std::runtime_error(msg), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// Backend answered with something structurally invalid, e.g. a logprob
// vector whose token count does not match the completion.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable or malformed input files (bad JSONL lines carry line numbers).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pic
