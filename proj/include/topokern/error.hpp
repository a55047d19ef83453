#pragma once

#include <stdexcept>
#include <string>

namespace topokern {

enum class ErrorCode {
    DegenerateKernel,
    NotInM,
    OutsideDisk,
    DegenerateProfile,
    BadConfig,
    ShapeMismatch,
    BadLabel,
    EmptyDataset,
    BankTooSmall,
    SignalTooShort,
    ZeroSignal,
    LengthMismatch,
    UnsupportedFormat,
    CorruptHeader,
    BadClass,
    TooFewSamples,
    MissingLabels,
    DanglingPath,
    DuplicatePath,
    IoError,
    ParseError,
};

const char* errorCodeName(ErrorCode code);

/// All library failures throw this; the CLI maps it to exit code 1
/// (or 2 for configuration/usage problems).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(errorCodeName(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace topokern
