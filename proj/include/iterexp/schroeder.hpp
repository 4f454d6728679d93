#pragma once

#include <iterexp/errors.hpp>

#include <complex>
#include <string>
#include <vector>

namespace iterexp::schroeder {

using Complex = std::complex<double>;

/// Branch of the complex logarithm, Im(log z) in [beta, beta + 2*pi).
/// The iterated-log convergence argument needs -1 < beta < 0.
struct Branch {
    double beta = -0.5;
};

/// The fixed point c = exp(c) closest to the real axis in the upper half
/// plane, with the residual |exp(c) - c| and the iteration count that
/// produced it.
struct FixedPoint {
    Complex c;
    double residual = 0.0;
    int iterations = 0;
};

struct SchroederConfig {
    Branch branch{};
    double r0 = 1e-6;           // radius of the disk around c where chi(z) = z - c
    int max_iter = 200;         // cap for the iterated log/exp searches
    double singular_eps = 1e-12; // orbit points this close to 0 raise DomainError
    double overflow_guard = 7e2; // exp argument real part above which evaluation aborts
};

/// SchroederConfig plus the fixed point computed once for it. All chi-side
/// operations take the context; it is immutable and cheap to copy.
struct Context {
    SchroederConfig config{};
    FixedPoint fixed_point{};
    Complex log_c{}; // branch_log(c); c^n = exp(n * log_c)
};

/// Complex logarithm with Im(result) in [beta, beta + 2*pi).
Complex branch_log(Complex z, const Branch& branch, double singular_eps = 1e-12);

/// Iterates z <- branch_log(z) from 1 + i until successive points differ by
/// less than 1e-15, then validates |exp(c) - c| < 1e-12.
FixedPoint find_fixed_point(const SchroederConfig& config = {});

/// Builds a Context (validates the config and locates the fixed point).
Context make_context(const SchroederConfig& config = {});

/// Schroeder solution chi(z) = c^k (log^(k)(z) - c), k the smallest index
/// with |log^(k)(z) - c| <= r0. Undefined on the singular set
/// D = {0, 1, e, e^e, ...} (orbit points hitting 0).
Complex chi(Complex z, const Context& ctx);

/// Inverse chi^-1(xi) = exp^(k)(c^-k xi + c), k the smallest index with
/// |c^-k xi| <= r0. chi_inv(chi(z)) = z everywhere off D.
Complex chi_inv(Complex xi, const Context& ctx);

/// chi'(z) = prod_{j=0}^{k-1} c / log^(j)(z).
Complex dchi(Complex z, const Context& ctx);

/// Derivative of chi_inv; the chain-rule product
/// c^-k * prod_{j=1}^{k} exp^(j)(c^-k xi + c), reciprocal of dchi at the
/// corresponding point.
Complex dchi_inv(Complex xi, const Context& ctx);

/// Non-integer iterate exp^(n)(z) = chi_inv(c^n chi(z)) with
/// c^n = exp(n * branch_log(c)).
Complex exp_iter(Complex z, double n, const Context& ctx);

struct IterateDerivatives {
    Complex value;
    Complex d_dz; // c^n chi_inv'(c^n chi(z)) chi'(z)
    Complex d_dn; // c^n chi_inv'(c^n chi(z)) chi(z) log(c)
};

IterateDerivatives exp_iter_derivatives(Complex z, double n, const Context& ctx);

/// Whether every exp argument on the chi_inv path of xi stays inside the
/// branch strip [beta, beta + 2*pi). When it does, chi(chi_inv(xi)) = xi;
/// when some argument leaves the strip the re-descent takes another branch
/// and the round trip fails.
bool chi_inv_path_in_strip(Complex xi, const Context& ctx);

struct CompositionDomainReport {
    Complex point{};
    bool in_domain = false;
    double max_round_trip_error = 0.0; // relative
    std::vector<double> m_samples;
    std::string error; // non-empty if an evaluation failed (forces in_domain = false)
};

/// Tests chi(chi_inv(c^m chi(z))) = c^m chi(z) over m_grid; z belongs to the
/// composition domain iff every sampled m round-trips within tol (relative).
CompositionDomainReport in_composition_domain(Complex z, const std::vector<double>& m_grid,
                                              double tol, const Context& ctx);

enum class GridQuantity { chi, exp_iter };

struct GridSpec {
    double re_min = -4.0, re_max = 4.0;
    double im_min = -4.0, im_max = 4.0;
    int n_re = 201, n_im = 201;
    GridQuantity quantity = GridQuantity::chi;
    double n = 0.0; // iterate order when quantity == exp_iter
};

struct GridCell {
    Complex z;
    Complex value;   // unspecified when flag != ok
    EvalFlag flag = EvalFlag::ok;
};

/// Row-major evaluation over the rectangle; errors are flagged per cell, not
/// thrown. Cells whose half-step neighbourhood contains a point of the
/// truncated singular set {0, 1, e, e^e, e^(e^e)} are flagged as domain even
/// when the sample itself evaluates, so renderings show the discontinuity
/// structure. `threads` > 1 splits rows across threads; output order is
/// independent of the split.
std::vector<GridCell> domain_grid(const GridSpec& spec, const Context& ctx, int threads = 1);

} // namespace iterexp::schroeder
