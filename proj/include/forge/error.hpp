#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Syntax or resolution failure while reading SQL text. `position` is a
// character offset into the input.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
    std::size_t position;
};

// A caller broke a documented precondition.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace forge
