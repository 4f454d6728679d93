#pragma once

#include <iterexp/abel.hpp>
#include <iterexp/schroeder.hpp>

#include <atomic>
#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace iterexp {

using Complex = std::complex<double>;

enum class BackendKind { abel_real, schroeder_complex };

/// Provider of exp^(n) for the addiplication operator and the neural
/// layers. The Abel backend works on the real line (and rejects operands
/// with an imaginary part or a -inf iterate); the Schroeder backend covers
/// the complex plane off the singular set. Carries a shared call counter so
/// tests can assert how many iterate evaluations an operation performs.
class Backend {
public:
    static Backend abel(const abel::AbelConfig& config = {});
    static Backend schroeder(const schroeder::SchroederConfig& config = {});

    BackendKind kind() const { return kind_; }
    const abel::AbelConfig& abel_config() const { return abel_config_; }
    const schroeder::Context& schroeder_context() const { return ctx_; }

    Complex exp_iter(Complex z, double n) const;

    struct Derivatives {
        Complex value;
        Complex d_dz;
        Complex d_dn;
    };
    Derivatives exp_iter_derivatives(Complex z, double n) const;

    long long iterate_call_count() const { return counter_->load(); }
    void reset_iterate_count() const { counter_->store(0); }

private:
    explicit Backend(BackendKind kind) : kind_(kind) {}
    double real_operand(Complex z) const;

    BackendKind kind_;
    abel::AbelConfig abel_config_{};
    schroeder::Context ctx_{}; // populated only for the Schroeder kind
    std::shared_ptr<std::atomic<long long>> counter_ = std::make_shared<std::atomic<long long>>(0);
};

/// The addiplication operator x (+)_n y = exp^(n)(exp^(-n)(x) + exp^(-n)(y)).
/// n = 0 is addition, n = 1 multiplication.
Complex addiplicate(Complex x, Complex y, double n, const Backend& backend);

/// n-ary form exp^(n)(sum_j exp^(-n)(x_j)); a single operand round-trips to
/// itself (up to composition tolerance).
Complex addiplicate_nary(std::span<const Complex> xs, double n, const Backend& backend);

struct AddiplicationGradients {
    Complex value;
    std::vector<Complex> d_operands; // one per operand
    Complex d_n;
};

/// Value plus analytic gradients w.r.t. both operands and n.
AddiplicationGradients addiplicate_with_grads(Complex x, Complex y, double n,
                                              const Backend& backend);

struct CurveSample {
    double n;
    Complex value;  // unspecified when flag != ok
    EvalFlag flag = EvalFlag::ok;
};

struct InterpolationCurve {
    std::vector<CurveSample> samples;
    double max_abs = 0.0;      // max |value| over ok samples
    double n_at_max = 0.0;
    Complex value_at_max{};
};

/// Samples x (+)_n y over n in [0, 1] (inclusive, uniform). Per-sample
/// errors are flagged, not thrown.
InterpolationCurve interpolation_curve(Complex x, Complex y, int n_samples,
                                       const Backend& backend);

} // namespace iterexp
