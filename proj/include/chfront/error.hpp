#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chfront {

enum class ErrorCode {
    NoConvergence,
    NotPinched,
    NeutralRoot,
    NotClosed,
    Degenerate,
    NoSolution,
    NonConvergence,
    Unresolved,
    StepFailure,
    IntegrationFailure,
    Blowup,
    NonFinite,
    NoFront,
    InsufficientData,
    TooFewOscillations,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Numerical or input failure raised by any chfront module. The code is what
/// callers branch on; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace chfront
