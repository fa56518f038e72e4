#pragma once

#include <stdexcept>
#include <string>

namespace dwtunnel {

/// Failure categories. The numeric values double as CLI exit codes and must
/// stay stable.
enum class ErrorCode : int {
    InvalidParams = 2,
    NonPositiveVariance = 3,
    EnergyTooLow = 4,
    GridTooNarrow = 5,
    InvalidGrid = 6,
    DegenerateQuartic = 7,
    NoBarrier = 8,
    VarianceCollapse = 9,
    NonFiniteState = 10,
    SingularPivot = 11,
    DriftBudgetExceeded = 12,
    EmptySeries = 13,
    DisjointWindows = 14,
    ConfigError = 15,
    IoError = 16,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::EnergyTooLow: return "EnergyTooLow";
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::DegenerateQuartic: return "DegenerateQuartic";
    case ErrorCode::NoBarrier: return "NoBarrier";
    case ErrorCode::VarianceCollapse: return "VarianceCollapse";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SingularPivot: return "SingularPivot";
    case ErrorCode::DriftBudgetExceeded: return "DriftBudgetExceeded";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::DisjointWindows: return "DisjointWindows";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the category prefix.
    const std::string& message() const noexcept { return message_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace dwtunnel
