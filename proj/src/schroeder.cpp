#include <iterexp/schroeder.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace iterexp::schroeder {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double fixed_point_step_tol = 1e-15;
constexpr double fixed_point_residual_tol = 1e-12;

void validate(const SchroederConfig& config) {
    if (!(config.branch.beta > -1.0 && config.branch.beta < 0.0))
        throw std::invalid_argument("schroeder: branch beta must lie in (-1, 0)");
    if (!(config.r0 > 0.0)) throw std::invalid_argument("schroeder: r0 must be positive");
    if (config.max_iter < 1) throw std::invalid_argument("schroeder: max_iter must be >= 1");
    if (!(config.singular_eps > 0.0))
        throw std::invalid_argument("schroeder: singular_eps must be positive");
}

Complex pow_int(Complex base, int k) {
    Complex r{1.0, 0.0};
    for (int j = 0; j < k; ++j) r *= base;
    return r;
}

void check_exp_argument(Complex z, const SchroederConfig& config) {
    if (z.real() > config.overflow_guard)
        throw OverflowError("schroeder: exp argument real part " + std::to_string(z.real()) +
                            " exceeds overflow guard");
}

// Iterated-log search for chi: returns k and fills `path` with
// z_0 = z, ..., z_k (the first point inside the r0 disk around c).
int log_path(Complex z, const Context& ctx, std::vector<Complex>& path) {
    const auto& cfg = ctx.config;
    const Complex c = ctx.fixed_point.c;
    path.clear();
    Complex t = z;
    for (int k = 0; k <= cfg.max_iter; ++k) {
        path.push_back(t);
        if (std::abs(t - c) <= cfg.r0) return k;
        t = branch_log(t, cfg.branch, cfg.singular_eps);
    }
    throw NoConvergenceError("schroeder: iterated log did not reach the r0 disk");
}

// Division count for chi_inv: returns k and the in-disk point c^-k xi + c.
int inv_entry_point(Complex xi, const Context& ctx, Complex& u) {
    const auto& cfg = ctx.config;
    Complex w = xi;
    for (int k = 0; k <= cfg.max_iter; ++k) {
        if (std::abs(w) <= cfg.r0) {
            u = w + ctx.fixed_point.c;
            return k;
        }
        w /= ctx.fixed_point.c;
    }
    throw NoConvergenceError("schroeder: c^-k xi did not reach the r0 disk");
}

bool in_strip(Complex z, const Branch& branch) {
    return z.imag() >= branch.beta && z.imag() < branch.beta + two_pi;
}

} // namespace

Complex branch_log(Complex z, const Branch& branch, double singular_eps) {
    if (std::abs(z) <= singular_eps)
        throw DomainError("schroeder: log of (near-)zero argument");
    double theta = std::arg(z); // principal value in (-pi, pi]
    while (theta < branch.beta) theta += two_pi;
    while (theta >= branch.beta + two_pi) theta -= two_pi;
    return Complex{std::log(std::abs(z)), theta};
}

FixedPoint find_fixed_point(const SchroederConfig& config) {
    validate(config);
    Complex z{1.0, 1.0};
    int iterations = 0;
    for (; iterations < config.max_iter; ++iterations) {
        Complex next = branch_log(z, config.branch, config.singular_eps);
        double step = std::abs(next - z);
        z = next;
        if (step < fixed_point_step_tol) {
            ++iterations;
            break;
        }
    }
    double residual = std::abs(std::exp(z) - z);
    if (residual >= fixed_point_residual_tol)
        throw NoConvergenceError("schroeder: fixed-point residual " + std::to_string(residual) +
                                 " above tolerance after " + std::to_string(iterations) +
                                 " iterations");
    return FixedPoint{z, residual, iterations};
}

Context make_context(const SchroederConfig& config) {
    Context ctx;
    ctx.config = config;
    ctx.fixed_point = find_fixed_point(config);
    ctx.log_c = branch_log(ctx.fixed_point.c, config.branch, config.singular_eps);
    return ctx;
}

Complex chi(Complex z, const Context& ctx) {
    std::vector<Complex> path;
    int k = log_path(z, ctx, path);
    return pow_int(ctx.fixed_point.c, k) * (path.back() - ctx.fixed_point.c);
}

Complex chi_inv(Complex xi, const Context& ctx) {
    Complex u;
    int k = inv_entry_point(xi, ctx, u);
    Complex z = u;
    for (int j = 0; j < k; ++j) {
        check_exp_argument(z, ctx.config);
        z = std::exp(z);
    }
    return z;
}

Complex dchi(Complex z, const Context& ctx) {
    std::vector<Complex> path;
    int k = log_path(z, ctx, path);
    Complex prod{1.0, 0.0};
    for (int j = 0; j < k; ++j) {
        if (std::abs(path[j]) <= ctx.config.singular_eps)
            throw SingularDerivativeError("schroeder: dchi factor denominator near zero");
        prod *= ctx.fixed_point.c / path[j];
    }
    return prod;
}

Complex dchi_inv(Complex xi, const Context& ctx) {
    Complex u;
    int k = inv_entry_point(xi, ctx, u);
    Complex z = u;
    Complex prod{1.0, 0.0};
    for (int j = 0; j < k; ++j) {
        check_exp_argument(z, ctx.config);
        z = std::exp(z); // z = exp^(j+1)(u)
        prod *= z;
    }
    return prod / pow_int(ctx.fixed_point.c, k);
}

Complex exp_iter(Complex z, double n, const Context& ctx) {
    if (n == 0.0) return z; // keep the identity iterate exact
    Complex cn = std::exp(n * ctx.log_c);
    return chi_inv(cn * chi(z, ctx), ctx);
}

IterateDerivatives exp_iter_derivatives(Complex z, double n, const Context& ctx) {
    Complex cn = std::exp(n * ctx.log_c);
    Complex chi_z = chi(z, ctx);
    Complex xi = cn * chi_z;
    Complex dinv = dchi_inv(xi, ctx);
    IterateDerivatives d;
    d.value = n == 0.0 ? z : chi_inv(xi, ctx);
    d.d_dz = cn * dinv * dchi(z, ctx);
    d.d_dn = cn * dinv * chi_z * ctx.log_c;
    return d;
}

bool chi_inv_path_in_strip(Complex xi, const Context& ctx) {
    Complex u;
    int k = inv_entry_point(xi, ctx, u);
    Complex z = u;
    for (int j = 0; j < k; ++j) {
        if (!in_strip(z, ctx.config.branch)) return false;
        check_exp_argument(z, ctx.config);
        z = std::exp(z);
    }
    return true;
}

CompositionDomainReport in_composition_domain(Complex z, const std::vector<double>& m_grid,
                                              double tol, const Context& ctx) {
    CompositionDomainReport report;
    report.point = z;
    report.m_samples = m_grid;
    try {
        Complex chi_z = chi(z, ctx);
        for (double m : m_grid) {
            Complex xi = std::exp(m * ctx.log_c) * chi_z;
            Complex round_trip = chi(chi_inv(xi, ctx), ctx);
            double err = std::abs(round_trip - xi) / std::max(std::abs(xi), 1e-300);
            report.max_round_trip_error = std::max(report.max_round_trip_error, err);
        }
        report.in_domain = report.max_round_trip_error <= tol;
    } catch (const Error& e) {
        report.in_domain = false;
        report.error = e.what();
    }
    return report;
}

namespace {

// Towers exp^(j)(0) representable in double: 0, 1, e, e^e, e^(e^e).
const double kTowers[] = {0.0, 1.0, std::numbers::e, 15.154262241479262,
                          3814279.104760214};

bool near_singular_set(Complex z, double radius) {
    for (double d : kTowers) {
        if (std::max(std::abs(z.real() - d), std::abs(z.imag())) <= radius) return true;
    }
    return false;
}

GridCell evaluate_cell(Complex z, const GridSpec& spec, const Context& ctx, double flag_radius) {
    GridCell cell;
    cell.z = z;
    try {
        cell.value = spec.quantity == GridQuantity::chi ? chi(z, ctx)
                                                        : exp_iter(z, spec.n, ctx);
        cell.flag = EvalFlag::ok;
    } catch (const Error& e) {
        cell.value = Complex{0.0, 0.0};
        cell.flag = flag_for(e);
    }
    if (cell.flag == EvalFlag::ok && near_singular_set(z, flag_radius))
        cell.flag = EvalFlag::domain;
    return cell;
}

} // namespace

std::vector<GridCell> domain_grid(const GridSpec& spec, const Context& ctx, int threads) {
    if (spec.n_re < 2 || spec.n_im < 2)
        throw std::invalid_argument("schroeder: grid resolution must be >= 2 per axis");
    if (!(spec.re_min < spec.re_max) || !(spec.im_min < spec.im_max))
        throw std::invalid_argument("schroeder: grid region is empty");

    const double dre = (spec.re_max - spec.re_min) / (spec.n_re - 1);
    const double dim = (spec.im_max - spec.im_min) / (spec.n_im - 1);
    const double flag_radius = std::max(dre, dim) / 2.0 + ctx.config.singular_eps;

    std::vector<GridCell> cells(static_cast<size_t>(spec.n_re) * spec.n_im);
    auto eval_rows = [&](int row_begin, int row_end) {
        for (int i = row_begin; i < row_end; ++i) {
            double im = spec.im_min + i * dim;
            for (int j = 0; j < spec.n_re; ++j) {
                double re = spec.re_min + j * dre;
                cells[static_cast<size_t>(i) * spec.n_re + j] =
                    evaluate_cell(Complex{re, im}, spec, ctx, flag_radius);
            }
        }
    };

    int n_threads = std::clamp(threads, 1, spec.n_im);
    if (n_threads == 1) {
        eval_rows(0, spec.n_im);
    } else {
        std::vector<std::thread> pool;
        int rows_per = (spec.n_im + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            int begin = t * rows_per;
            int end = std::min(spec.n_im, begin + rows_per);
            if (begin >= end) break;
            pool.emplace_back(eval_rows, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return cells;
}

} // namespace iterexp::schroeder
