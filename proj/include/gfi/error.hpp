#pragma once

#include <exception>
#include <optional>
#include <string>

namespace gfi {

// Byte range plus human position of a token or statement in the source text.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    int line = 1;
    int column = 1;
};

enum class ErrKind {
    Parse,
    UnknownVariable,
    UnsupportedEvent,
    ContinuousObservation,
    InvalidProgram,
    UnsupportedOp,
    DomainError,
    DivisionByZero,
    ZeroEvidence,
    MassesUnavailable,
    OracleUnavailable,
    Usage,
};

inline const char* err_kind_name(ErrKind k) {
    switch (k) {
        case ErrKind::Parse: return "parse error";
        case ErrKind::UnknownVariable: return "unknown variable";
        case ErrKind::UnsupportedEvent: return "unsupported event";
        case ErrKind::ContinuousObservation: return "continuous observation";
        case ErrKind::InvalidProgram: return "invalid program";
        case ErrKind::UnsupportedOp: return "unsupported operation";
        case ErrKind::DomainError: return "domain error";
        case ErrKind::DivisionByZero: return "division by zero";
        case ErrKind::ZeroEvidence: return "zero evidence";
        case ErrKind::MassesUnavailable: return "masses unavailable";
        case ErrKind::OracleUnavailable: return "oracle unavailable";
        case ErrKind::Usage: return "usage error";
    }
    return "error";
}

// Front-end errors (exit 2) carry a span; evaluation errors (exit 3) usually do not.
class GfiError : public std::exception {
public:
    GfiError(ErrKind kind, std::string message, std::optional<SourceSpan> span = std::nullopt)
        : kind_(kind), message_(std::move(message)), span_(span) {
        what_ = std::string(err_kind_name(kind_)) + ": " + message_;
        if (span_) {
            what_ += " (line " + std::to_string(span_->line) + ", column " +
                     std::to_string(span_->column) + ")";
        }
    }

    ErrKind kind() const { return kind_; }
    const std::string& message() const { return message_; }
    const std::optional<SourceSpan>& span() const { return span_; }
    const char* what() const noexcept override { return what_.c_str(); }

    bool is_front_end() const {
        switch (kind_) {
            case ErrKind::Parse:
            case ErrKind::UnknownVariable:
            case ErrKind::UnsupportedEvent:
            case ErrKind::ContinuousObservation:
            case ErrKind::InvalidProgram:
                return true;
            default:
                return false;
        }
    }

private:
    ErrKind kind_;
    std::string message_;
    std::optional<SourceSpan> span_;
    std::string what_;
};

}  // namespace gfi
