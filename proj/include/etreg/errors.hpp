#ifndef ETREG_ERRORS_HPP
#define ETREG_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace etreg {

enum class ErrorKind {
    NotMMatrix,
    ConstructionFailed,
    RootsNotSimpleImaginary,
    InvalidPair,
    SingularSolve,
    SingularT,
    NonPositiveGain,
    DivergenceDetected,
    ZenoSuspected,
    NoSignChange,
    ParseError,
    ValidationError,
    IoError,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotMMatrix: return "NotMMatrix";
        case ErrorKind::ConstructionFailed: return "ConstructionFailed";
        case ErrorKind::RootsNotSimpleImaginary: return "RootsNotSimpleImaginary";
        case ErrorKind::InvalidPair: return "InvalidPair";
        case ErrorKind::SingularSolve: return "SingularSolve";
        case ErrorKind::SingularT: return "SingularT";
        case ErrorKind::NonPositiveGain: return "NonPositiveGain";
        case ErrorKind::DivergenceDetected: return "DivergenceDetected";
        case ErrorKind::ZenoSuspected: return "ZenoSuspected";
        case ErrorKind::NoSignChange: return "NoSignChange";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Base exception for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Runtime failures (the simulation itself misbehaved) as opposed to
    /// bad input. The CLI maps these to a distinct exit code.
    bool is_runtime_failure() const noexcept {
        return kind_ == ErrorKind::DivergenceDetected || kind_ == ErrorKind::ZenoSuspected;
    }

private:
    ErrorKind kind_;
};

struct ValidationIssue {
    std::string path;
    std::string message;
};

/// Carries every violated constraint found in a scenario, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<ValidationIssue> issues)
        : Error(ErrorKind::ValidationError, summarize(issues)), issues_(std::move(issues)) {}

    const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

    bool has_path_prefix(const std::string& prefix) const {
        for (const auto& issue : issues_) {
            if (issue.path.rfind(prefix, 0) == 0) return true;
        }
        return false;
    }

private:
    static std::string summarize(const std::vector<ValidationIssue>& issues) {
        std::string out = std::to_string(issues.size()) + " issue(s)";
        for (const auto& issue : issues) {
            out += "\n  " + issue.path + ": " + issue.message;
        }
        return out;
    }

    std::vector<ValidationIssue> issues_;
};

}  // namespace etreg

#endif  // ETREG_ERRORS_HPP
