// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sscurv {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A computation would exceed a point or cell budget.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed IFS description or run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sscurv
