#pragma once

#include <stdexcept>
#include <string>

namespace sustain {

/// Parameter or configuration rejected before any computation.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The request is well-formed but outside what the engine supports
/// (state space too large, unsupported gamma for a full distribution, ...).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Alternating-sum closed forms refuse block counts beyond their stable range.
class PrecisionError : public CapabilityError {
public:
    using CapabilityError::CapabilityError;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace sustain
