#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace confine {

enum class ErrorCode {
    PointOutsideDomain,
    NonRadialProfile,
    UnsupportedDomain,
    GridTooCoarse,
    MissingInfinityRecord,
    InvalidSplit,
    WrongCodimension,
    WrongComponentKind,
    InconclusiveEndpoints,
    NonPositivePsi,
    PreconditionViolated,
    BarrierUndefined,
    LinearSolveFailure,
    InvalidArgument,
    ParseError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
        case ErrorCode::NonRadialProfile: return "NonRadialProfile";
        case ErrorCode::UnsupportedDomain: return "UnsupportedDomain";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::MissingInfinityRecord: return "MissingInfinityRecord";
        case ErrorCode::InvalidSplit: return "InvalidSplit";
        case ErrorCode::WrongCodimension: return "WrongCodimension";
        case ErrorCode::WrongComponentKind: return "WrongComponentKind";
        case ErrorCode::InconclusiveEndpoints: return "InconclusiveEndpoints";
        case ErrorCode::NonPositivePsi: return "NonPositivePsi";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::BarrierUndefined: return "BarrierUndefined";
        case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace confine
