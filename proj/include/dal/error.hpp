#pragma once

#include <stdexcept>
#include <string>

namespace dal {

/// Bad argument to a library operation (non-finite input, out-of-range
/// class index, dimension mismatch, empty container).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration. The message names the offending
/// fields by dotted path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called on state it is not defined for.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidInput(what);
}

}  // namespace detail
}  // namespace dal
