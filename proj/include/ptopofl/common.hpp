#pragma once

#include <stdexcept>
#include <string>

namespace ptopofl {

// Bad data handed to a library function (non-finite input, shape mismatch, ...).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent or out-of-range configuration. The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input exceeds a hard size cap (caller is expected to subsample first).
struct size_error : input_error {
    explicit size_error(const std::string& msg) : input_error(msg) {}
};

// Synthetic data generation could not satisfy its target (e.g. rate matching).
struct generation_error : std::runtime_error {
    explicit generation_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ptopofl
