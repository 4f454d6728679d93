#pragma once

#include <iterexp/addiplication.hpp>

#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace iterexp::nn {

using iterexp::Backend;
using iterexp::Complex;

enum class TransferKind { identity, logistic };

/// sigma(t); the logistic case is 1/(1 + exp(-t)) through the complex exp.
Complex transfer(Complex t, TransferKind kind);
Complex transfer_derivative(Complex t, TransferKind kind);

/// Minimal dense complex matrix, row-major.
struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> data;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    Complex& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    const Complex& at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

/// W real uniform in [-0.5, 0.5] scaled by 1/sqrt(cols).
CMatrix random_init(int rows, int cols, std::mt19937& rng);

/// y = sigma(W x).
struct AdditiveLayer {
    CMatrix W;
    TransferKind sigma = TransferKind::identity;
};

/// Product units y_i = exp(sum_j W_ij log x_j) = prod_j x_j^W_ij via the
/// configured complex log branch; no transfer function.
struct ProductLayer {
    CMatrix W;
    schroeder::Branch branch{};
};

/// y_i = sigma(exp^(n_i)(sum_j W_ij exp^(-n_i)(x_j))); one trainable
/// interpolation parameter per output neuron. n_i = 0 sums, n_i = 1
/// multiplies.
struct AddiplicationLayer {
    CMatrix W;
    std::vector<double> n; // one per output neuron
    TransferKind sigma = TransferKind::identity;
    Backend backend = Backend::schroeder();
};

/// y_i = sigma(exp^(n_hat_i)(sum_j W_ij exp^(n_tilde_j)(x_j))); the iterate
/// order is split into a per-output and a per-input parameter, so the cost
/// stays at one iterate per input plus one per output. Addiplication is the
/// special case n_hat_i = -n_tilde_j.
struct SplitIterateLayer {
    CMatrix W;
    std::vector<double> n_hat;   // one per output neuron
    std::vector<double> n_tilde; // one per input
    TransferKind sigma = TransferKind::identity;
    Backend backend = Backend::schroeder();
};

using Layer = std::variant<AdditiveLayer, ProductLayer, AddiplicationLayer, SplitIterateLayer>;
using Network = std::vector<Layer>;

int in_dim(const Layer& layer);
int out_dim(const Layer& layer);
const char* kind_name(const Layer& layer);

/// Everything backward() needs, captured during forward().
struct ForwardCache {
    std::vector<Complex> input;
    std::vector<Complex> tilde;        // per-input transformed values (additive: = input)
    std::vector<Complex> tilde_d_dz;   // d tilde_j / d x_j
    std::vector<Complex> tilde_d_dn;   // d tilde_j / d n_tilde_j (split only)
    CMatrix inner;                     // addiplication: exp^(-n_i)(x_j) per (i, j)
    CMatrix inner_d_dz;
    CMatrix inner_d_dn;                // derivative w.r.t. the iterate order m = -n_i
    std::vector<Complex> sums;         // A_i = weighted sums
    std::vector<Complex> pre_transfer; // u_i fed to sigma (product: = output)
    std::vector<Complex> outer_d_dz;   // d u_i / d A_i
    std::vector<Complex> outer_d_dn;   // d u_i / d n(_hat)_i
    std::vector<Complex> output;
};

/// Gradients of a real loss. Complex entries pack dL/dRe + i dL/dIm; the
/// same convention applies to the upstream/output cotangents.
struct LayerGradients {
    CMatrix d_W;
    std::vector<double> d_n;       // AddiplicationLayer
    std::vector<double> d_n_hat;   // SplitIterateLayer
    std::vector<double> d_n_tilde; // SplitIterateLayer
    std::vector<Complex> d_input;
};

std::vector<Complex> forward(const Layer& layer, std::span<const Complex> x, ForwardCache& cache);
std::vector<Complex> forward(const Layer& layer, std::span<const Complex> x);

/// upstream holds dL/dRe(y_i) + i dL/dIm(y_i).
LayerGradients backward(const Layer& layer, const ForwardCache& cache,
                        std::span<const Complex> upstream);

/// The neuron-dependent transfer exp^(n_tilde)(sigma(exp^(n_hat)(t))); an
/// additive net equipped with it reproduces the split-iterate layer.
Complex parameterized_transfer(Complex t, double n_hat, double n_tilde, TransferKind sigma,
                               const Backend& backend);

struct GradCheckEntry {
    std::string parameter;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
    bool singular = false; // finite-difference evaluation hit a branch cut / domain error
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double worst_rel_error = 0.0; // over non-singular entries
    int singular_count = 0;
    bool pass(double tol) const { return worst_rel_error < tol; }
};

/// Central finite differences over every trainable scalar (Re/Im of each W
/// entry, every n parameter) against the analytic backward pass. The loss is
/// sum (Re y - t)^2 + sum (Im y)^2 with targets drawn from loss_seed.
GradCheckReport grad_check(const Layer& layer, std::span<const Complex> x, unsigned loss_seed,
                           double eps = 1e-6);

struct Sample {
    std::vector<Complex> input;
    std::vector<double> target;
};
using Dataset = std::vector<Sample>;

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 100;
    double imag_penalty = 1.0; // lambda in L = sum (Re y - t)^2 + lambda sum (Im y)^2
};

struct TrainTrace {
    std::vector<double> loss;    // per-epoch mean loss over non-skipped samples
    std::vector<int> skipped;    // per-epoch count of samples skipped on evaluation errors
};

/// L = sum_i (Re y_i - t_i)^2 + lambda sum_i (Im y_i)^2; fills the packed
/// cotangent for backward().
double loss_and_cotangent(std::span<const Complex> y, std::span<const double> target,
                          double lambda, std::vector<Complex>& cotangent);

std::vector<Complex> forward_network(const Network& net, std::span<const Complex> x);

/// Full-batch gradient descent. Samples whose forward/backward evaluation
/// throws are skipped for that epoch and counted. Throws DivergedError when
/// the loss stops being finite.
TrainTrace sgd_train(Network& net, const Dataset& data, const TrainConfig& config);

} // namespace iterexp::nn
