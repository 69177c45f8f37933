#pragma once

#include <stdexcept>
#include <string>

namespace cbo {

// Precondition or domain violation on an API argument.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numeric failure during gradient training (NaN/Inf in loss, gradient or
// parameters).  Carries the global step index at which training aborted.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& what, long long step_index = -1)
        : std::runtime_error(what), step(step_index) {}
    long long step;
};

// File or stream level failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized content.  `line` is 1-based when it refers to a line
// oriented format, 0 otherwise.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what, long long line_number = 0)
        : std::runtime_error(what), line(line_number) {}
    long long line;
};

}  // namespace cbo
