#pragma once

#include <stdexcept>
#include <string>

namespace iterexp {

/// Failure categories shared across the library. CSV/JSON exporters map
/// these to the flag strings "domain", "overflow", "noconv", "singular",
/// "diverged"; successful evaluations carry "ok".
enum class ErrorKind {
    domain,              // input outside the operation's domain (singular set, neg-infinity, ...)
    overflow,            // an intermediate exp exceeded the overflow guard
    singular_derivative, // a derivative factor has a (near-)zero denominator
    no_convergence,      // an iteration cap was reached without meeting tolerance
    diverged,            // training loss became non-finite
    dimension,           // shape mismatch between containers
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class OverflowError : public Error {
public:
    explicit OverflowError(const std::string& what) : Error(ErrorKind::overflow, what) {}
};

class SingularDerivativeError : public Error {
public:
    explicit SingularDerivativeError(const std::string& what)
        : Error(ErrorKind::singular_derivative, what) {}
};

class NoConvergenceError : public Error {
public:
    explicit NoConvergenceError(const std::string& what) : Error(ErrorKind::no_convergence, what) {}
};

class DivergedError : public Error {
public:
    explicit DivergedError(const std::string& what) : Error(ErrorKind::diverged, what) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(ErrorKind::dimension, what) {}
};

/// Per-sample outcome used by grid/curve exports. Errors are recorded as
/// flags rather than thrown so a single bad cell cannot abort an export.
enum class EvalFlag { ok, domain, overflow, noconv };

inline const char* to_string(EvalFlag flag) {
    switch (flag) {
        case EvalFlag::ok: return "ok";
        case EvalFlag::domain: return "domain";
        case EvalFlag::overflow: return "overflow";
        case EvalFlag::noconv: return "noconv";
    }
    return "ok";
}

inline EvalFlag flag_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::overflow: return EvalFlag::overflow;
        case ErrorKind::no_convergence: return EvalFlag::noconv;
        default: return EvalFlag::domain;
    }
}

} // namespace iterexp
