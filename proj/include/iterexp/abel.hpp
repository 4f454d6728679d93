#pragma once

#include <iterexp/errors.hpp>

namespace iterexp::abel {

/// Real value extended with a tagged negative infinity. The tag is produced
/// only by psi_inv (and the iterates built on it) for arguments <= -1;
/// callers must branch on it explicitly instead of relying on IEEE -inf.
class ExtendedReal {
public:
    ExtendedReal(double v) : value_(v) {} // NOLINT: implicit by design
    static ExtendedReal neg_infinity() { return ExtendedReal(tag{}); }

    bool is_neg_infinity() const noexcept { return neg_inf_; }
    bool is_finite() const noexcept { return !neg_inf_; }

    /// Finite value; throws if the tag is set.
    double value() const {
        if (neg_inf_) throw DomainError("ExtendedReal: value() on negative infinity");
        return value_;
    }

private:
    struct tag {};
    explicit ExtendedReal(tag) : value_(0.0), neg_inf_(true) {}
    double value_;
    bool neg_inf_ = false;
};

struct AbelConfig {
    int max_iter_k = 100;         // cap on the iterated log/exp depth; unreachable in practice
    double overflow_guard = 7e2;  // exp argument magnitude above which evaluation aborts
};

/// Solution of psi(exp(x)) = psi(x) + 1 on the real line:
/// psi(x) = log^(k)(x) + k with k the unique integer giving log^(k)(x) in [0,1)
/// (k = -1 for x < 0, i.e. psi(x) = exp(x) - 1). Strictly increasing,
/// range (-1, inf).
double psi(double x, const AbelConfig& config = {});

/// Inverse of psi: exp^(k)(p - k) with 0 <= p - k < 1; returns the tagged
/// negative infinity for p <= -1.
ExtendedReal psi_inv(double p, const AbelConfig& config = {});

/// psi'(x) = prod_{j=0}^{k-1} 1/log^(j)(x); exp(x) on the k = -1 branch.
double dpsi(double x, const AbelConfig& config = {});

/// Derivative of psi_inv at p > -1. Computed as the chain-rule product
/// prod_{j=0}^{k-1} psi_inv(p - j); equals 1/dpsi(psi_inv(p)).
double dpsi_inv(double p, const AbelConfig& config = {});

/// Non-integer iterate exp^(n)(x) = psi_inv(psi(x) + n). Integer n
/// reproduces exp, the identity and log; the result is the tagged negative
/// infinity when psi(x) + n <= -1.
ExtendedReal exp_iter(double x, double n, const AbelConfig& config = {});

struct IterateDerivatives {
    ExtendedReal value;
    double d_dx; // dpsi_inv(psi(x) + n) * dpsi(x)
    double d_dn; // dpsi_inv(psi(x) + n)
};

/// Value of exp^(n)(x) together with its partial derivatives. Requires
/// psi(x) + n > -1 (throws DomainError otherwise).
IterateDerivatives exp_iter_derivatives(double x, double n, const AbelConfig& config = {});

} // namespace iterexp::abel
