#pragma once

#include <stdexcept>
#include <string>

namespace odct {

/// Raised when caller-supplied data violates a documented precondition
/// (bad files, bad config, shape mismatches). The CLI maps it to exit 1;
/// anything else escaping to main is an internal error (exit 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace odct
