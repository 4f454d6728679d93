#include <iterexp/abel.hpp>

#include <cmath>
#include <string>

namespace iterexp::abel {

namespace {

// Iterates t -> log(t) until t lands in [0, 1). The comparison is exact:
// a value that rounds to exactly 1.0 takes one more log and ends up at 0.
int iterated_log(double x, double& t, const AbelConfig& config) {
    t = x;
    int k = 0;
    while (t >= 1.0) {
        t = std::log(t);
        if (++k > config.max_iter_k)
            throw NoConvergenceError("abel: iterated log exceeded max_iter_k");
    }
    return k;
}

void check_exp_argument(double t, const AbelConfig& config) {
    if (t > config.overflow_guard)
        throw OverflowError("abel: exp argument " + std::to_string(t) + " exceeds overflow guard");
}

} // namespace

double psi(double x, const AbelConfig& config) {
    if (x < 0.0) return std::exp(x) - 1.0; // k = -1 branch
    double t;
    int k = iterated_log(x, t, config);
    return t + static_cast<double>(k);
}

ExtendedReal psi_inv(double p, const AbelConfig& config) {
    if (p <= -1.0) return ExtendedReal::neg_infinity();
    if (p < 0.0) return std::log(p + 1.0); // k = -1 branch
    int k = static_cast<int>(std::floor(p));
    double t = p - static_cast<double>(k);
    for (int j = 0; j < k; ++j) {
        check_exp_argument(t, config);
        t = std::exp(t);
    }
    return t;
}

double dpsi(double x, const AbelConfig& config) {
    if (x < 0.0) return std::exp(x);
    double t = x;
    int k = 0;
    double prod = 1.0;
    while (t >= 1.0) {
        // Factors are >= 1 by construction of k; the guard only fires on
        // pathological inputs (NaN propagation and the like).
        if (std::abs(t) < 1e-300)
            throw SingularDerivativeError("abel: dpsi factor denominator is zero");
        prod /= t;
        t = std::log(t);
        if (++k > config.max_iter_k)
            throw NoConvergenceError("abel: iterated log exceeded max_iter_k");
    }
    return prod;
}

double dpsi_inv(double p, const AbelConfig& config) {
    if (p <= -1.0) throw DomainError("abel: dpsi_inv requires p > -1");
    if (p < 0.0) return 1.0 / (p + 1.0); // derivative of log(p + 1)
    int k = static_cast<int>(std::floor(p));
    double t = p - static_cast<double>(k);
    double prod = 1.0;
    for (int j = 0; j < k; ++j) {
        check_exp_argument(t, config);
        t = std::exp(t); // t = exp^(j+1)(p - k) = psi_inv(p - k + j + 1)
        prod *= t;
    }
    return prod;
}

ExtendedReal exp_iter(double x, double n, const AbelConfig& config) {
    if (n == 0.0) return x; // keep the identity iterate exact
    return psi_inv(psi(x, config) + n, config);
}

IterateDerivatives exp_iter_derivatives(double x, double n, const AbelConfig& config) {
    double p = psi(x, config) + n;
    if (p <= -1.0)
        throw DomainError("abel: exp_iter derivative undefined, psi(x) + n <= -1");
    double dinv = dpsi_inv(p, config);
    ExtendedReal value = n == 0.0 ? ExtendedReal(x) : psi_inv(p, config);
    return IterateDerivatives{value, dinv * dpsi(x, config), dinv};
}

} // namespace iterexp::abel
