#include "topokern/error.hpp"

namespace topokern {

const char* errorCodeName(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateKernel: return "DegenerateKernel";
        case ErrorCode::NotInM: return "NotInM";
        case ErrorCode::OutsideDisk: return "OutsideDisk";
        case ErrorCode::DegenerateProfile: return "DegenerateProfile";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::BadLabel: return "BadLabel";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::BankTooSmall: return "BankTooSmall";
        case ErrorCode::SignalTooShort: return "SignalTooShort";
        case ErrorCode::ZeroSignal: return "ZeroSignal";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptHeader: return "CorruptHeader";
        case ErrorCode::BadClass: return "BadClass";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::MissingLabels: return "MissingLabels";
        case ErrorCode::DanglingPath: return "DanglingPath";
        case ErrorCode::DuplicatePath: return "DuplicatePath";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "UnknownError";
}

} // namespace topokern
