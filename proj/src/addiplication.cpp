#include <iterexp/addiplication.hpp>

#include <cmath>
#include <stdexcept>

namespace iterexp {

Backend Backend::abel(const abel::AbelConfig& config) {
    Backend b(BackendKind::abel_real);
    b.abel_config_ = config;
    return b;
}

Backend Backend::schroeder(const schroeder::SchroederConfig& config) {
    Backend b(BackendKind::schroeder_complex);
    b.ctx_ = schroeder::make_context(config);
    return b;
}

double Backend::real_operand(Complex z) const {
    if (std::abs(z.imag()) > 1e-12)
        throw DomainError("backend: Abel backend requires real operands");
    return z.real();
}

Complex Backend::exp_iter(Complex z, double n) const {
    counter_->fetch_add(1);
    if (kind_ == BackendKind::abel_real) {
        abel::ExtendedReal r = abel::exp_iter(real_operand(z), n, abel_config_);
        if (r.is_neg_infinity())
            throw DomainError("backend: Abel iterate saturated to -infinity");
        return Complex{r.value(), 0.0};
    }
    return schroeder::exp_iter(z, n, ctx_);
}

Backend::Derivatives Backend::exp_iter_derivatives(Complex z, double n) const {
    counter_->fetch_add(1);
    if (kind_ == BackendKind::abel_real) {
        abel::IterateDerivatives d = abel::exp_iter_derivatives(real_operand(z), n, abel_config_);
        return Derivatives{Complex{d.value.value(), 0.0}, Complex{d.d_dx, 0.0},
                           Complex{d.d_dn, 0.0}};
    }
    schroeder::IterateDerivatives d = schroeder::exp_iter_derivatives(z, n, ctx_);
    return Derivatives{d.value, d.d_dz, d.d_dn};
}

Complex addiplicate(Complex x, Complex y, double n, const Backend& backend) {
    Complex inner = backend.exp_iter(x, -n) + backend.exp_iter(y, -n);
    return backend.exp_iter(inner, n);
}

Complex addiplicate_nary(std::span<const Complex> xs, double n, const Backend& backend) {
    if (xs.empty())
        throw std::invalid_argument("addiplicate_nary: at least one operand required");
    Complex sum{0.0, 0.0};
    for (Complex x : xs) sum += backend.exp_iter(x, -n);
    return backend.exp_iter(sum, n);
}

AddiplicationGradients addiplicate_with_grads(Complex x, Complex y, double n,
                                              const Backend& backend) {
    // Inner iterates at order m = -n; dm/dn = -1 flips the n-derivative sign.
    Backend::Derivatives ix = backend.exp_iter_derivatives(x, -n);
    Backend::Derivatives iy = backend.exp_iter_derivatives(y, -n);
    Complex inner_sum = ix.value + iy.value;
    Backend::Derivatives outer = backend.exp_iter_derivatives(inner_sum, n);

    AddiplicationGradients g;
    g.value = outer.value;
    g.d_operands = {outer.d_dz * ix.d_dz, outer.d_dz * iy.d_dz};
    g.d_n = outer.d_dn + outer.d_dz * (-ix.d_dn - iy.d_dn);
    return g;
}

InterpolationCurve interpolation_curve(Complex x, Complex y, int n_samples,
                                       const Backend& backend) {
    if (n_samples < 2)
        throw std::invalid_argument("interpolation_curve: need at least 2 samples");
    InterpolationCurve curve;
    curve.samples.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        CurveSample s;
        s.n = static_cast<double>(i) / (n_samples - 1);
        try {
            s.value = addiplicate(x, y, s.n, backend);
            s.flag = EvalFlag::ok;
            if (std::abs(s.value) > curve.max_abs) {
                curve.max_abs = std::abs(s.value);
                curve.n_at_max = s.n;
                curve.value_at_max = s.value;
            }
        } catch (const Error& e) {
            s.value = Complex{0.0, 0.0};
            s.flag = flag_for(e);
        }
        curve.samples.push_back(s);
    }
    return curve;
}

} // namespace iterexp
