#pragma once

#include <stdexcept>
#include <string>

namespace hfclt {

enum class ErrorKind {
    DegreeTooLarge,
    IndexOutOfRange,
    OrderOutOfRange,
    NotADensity,
    MassNotOne,
    OddLeadingDegree,
    DimensionTooSmall,
    TruncationOverflow,
    NoConvergence,
    PreconditionViolated,
    SpectralGapViolation,
    HypothesisNotSatisfied,
    BarycenterOutOfRange,
    RateNotApplicable,
    DegenerateWindow,
    OrderTooSmall,
    InvalidConfig,
    Io,
};

inline const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the CLI can map it to
// an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised when nonnegativity certification fails; `witness` is a point where
// the candidate density is negative. Odd leading degree uses the same type
// with kind OddLeadingDegree.
class NotADensityError : public Error {
public:
    NotADensityError(double witness, const std::string& what,
                     ErrorKind kind = ErrorKind::NotADensity)
        : Error(kind, what), witness_(witness) {}

    [[nodiscard]] double witness() const noexcept { return witness_; }

private:
    double witness_;
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorKind::NotADensity: return "NotADensity";
    case ErrorKind::MassNotOne: return "MassNotOne";
    case ErrorKind::OddLeadingDegree: return "OddLeadingDegree";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::TruncationOverflow: return "TruncationOverflow";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::SpectralGapViolation: return "SpectralGapViolation";
    case ErrorKind::HypothesisNotSatisfied: return "HypothesisNotSatisfied";
    case ErrorKind::BarycenterOutOfRange: return "BarycenterOutOfRange";
    case ErrorKind::RateNotApplicable: return "RateNotApplicable";
    case ErrorKind::DegenerateWindow: return "DegenerateWindow";
    case ErrorKind::OrderTooSmall: return "OrderTooSmall";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace hfclt
