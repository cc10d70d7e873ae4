#pragma once

#include <stdexcept>
#include <string>

namespace ainf {

/// Bad user input (malformed files, mismatched rings, violated preconditions).
/// The CLI maps this to exit code 1.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A broken internal invariant (sign bugs, certificates that fail to
/// re-verify). The CLI maps this to exit code 2.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ainf
