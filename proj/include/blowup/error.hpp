#ifndef BLOWUP_ERROR_HPP
#define BLOWUP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace blowup
{

enum class ErrorCode {
    InvalidExponent,
    InvalidParameter,
    InvalidGrid,
    ParseError,
    NonFinite,
    DomainTooSmall,
    OutOfDomain,
    CutoffViolation,
    InsufficientGrowth,
    InsufficientRange,
    PreconditionFailed,
    StepFailure,
    DomainCoverage,
    Mismatch,
    MissingInput,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DomainTooSmall: return "DomainTooSmall";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::CutoffViolation: return "CutoffViolation";
    case ErrorCode::InsufficientGrowth: return "InsufficientGrowth";
    case ErrorCode::InsufficientRange: return "InsufficientRange";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::DomainCoverage: return "DomainCoverage";
    case ErrorCode::Mismatch: return "Mismatch";
    case ErrorCode::MissingInput: return "MissingInput";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code. All library failures use it.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what)
{
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string &what)
{
    if (!cond) {
        fail(code, what);
    }
}

} // namespace blowup

#endif
