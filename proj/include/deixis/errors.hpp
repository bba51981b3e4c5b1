#pragma once

#include <stdexcept>
#include <string>

namespace deixis {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PointBehindCamera : Error {
    explicit PointBehindCamera(const std::string& msg) : Error(msg) {}
};

struct ConfigInvalid : Error {
    explicit ConfigInvalid(const std::string& msg) : Error(msg) {}
};

struct NoValidViewpoint : Error {
    explicit NoValidViewpoint(const std::string& msg) : Error(msg) {}
};

struct NoEligibleTarget : Error {
    explicit NoEligibleTarget(const std::string& msg) : Error(msg) {}
};

struct UnreachableTarget : Error {
    explicit UnreachableTarget(const std::string& msg) : Error(msg) {}
};

struct DegeneratePose : Error {
    explicit DegeneratePose(const std::string& msg) : Error(msg) {}
};

struct CategoryInfeasible : Error {
    explicit CategoryInfeasible(const std::string& msg) : Error(msg) {}
};

struct InsufficientDistractors : Error {
    explicit InsufficientDistractors(const std::string& msg) : Error(msg) {}
};

struct RephraserUnavailable : Error {
    explicit RephraserUnavailable(const std::string& msg) : Error(msg) {}
};

struct ValidationFailed : Error {
    explicit ValidationFailed(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct GateClosed : Error {
    explicit GateClosed(const std::string& msg) : Error(msg) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

struct WidthMismatch : Error {
    explicit WidthMismatch(const std::string& msg) : Error(msg) {}
};

struct UnknownQaId : Error {
    explicit UnknownQaId(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line_no) : Error(msg), line(line_no) {}
    int line;
};

struct IoFailure : Error {
    explicit IoFailure(const std::string& msg) : Error(msg) {}
};

struct FlagViolation : Error {
    explicit FlagViolation(const std::string& msg) : Error(msg) {}
};

struct SuiteFailure : Error {
    explicit SuiteFailure(const std::string& msg) : Error(msg) {}
};

} // namespace deixis
