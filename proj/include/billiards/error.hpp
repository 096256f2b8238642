#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace billiards {

enum class ErrorKind {
    InvalidInput,
    NonConvex,
    ClosureViolation,
    DegenerateTangency,
    CoincidentPoints,
    FitUnstable,
    QuadratureStall,
    InversionFail,
    StepUnderflow,
    GridTooCoarse,
    PositivityViolation,
    NoConvergence,
    OrderingCollapse,
    OutOfSlopeRange,
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable failure category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NonConvex: return "NonConvex";
    case ErrorKind::ClosureViolation: return "ClosureViolation";
    case ErrorKind::DegenerateTangency: return "DegenerateTangency";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::FitUnstable: return "FitUnstable";
    case ErrorKind::QuadratureStall: return "QuadratureStall";
    case ErrorKind::InversionFail: return "InversionFail";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::OrderingCollapse: return "OrderingCollapse";
    case ErrorKind::OutOfSlopeRange: return "OutOfSlopeRange";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace billiards
