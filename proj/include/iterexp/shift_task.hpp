#pragma once

#include <iterexp/layers.hpp>

#include <complex>
#include <cstdint>
#include <vector>

namespace iterexp::shift {

using iterexp::Complex;

/// One instance of the variable pattern-shift task: binary pattern x of
/// length N, shift amount m, its one-hot encoding s, and the target
/// y_n = x_{(n-m) mod N}.
struct ShiftInstance {
    std::vector<int> x;
    int m = 0;
    std::vector<int> s;
    std::vector<int> y;

    int size() const { return static_cast<int>(x.size()); }
};

/// Reproducible random instance: uniform bits, uniform shift.
ShiftInstance generate_instance(int N, uint64_t seed);

/// Instance with explicit pattern and shift (used for exhaustive sweeps).
ShiftInstance make_instance(const std::vector<int>& x, int m);

/// Definition-faithful O(N^2) transform, F(x)_k = sum_n x_n e^{-2 pi i kn/N}.
std::vector<Complex> dft(const std::vector<Complex>& v);

/// Inverse with the 1/N factor; inverse_dft(dft(v)) = v.
std::vector<Complex> inverse_dft(const std::vector<Complex>& v);

/// The three-layer network solving the shift task analytically: an additive
/// layer holding the DFT coefficients for the pattern (rows 0..N-1 -> X_k)
/// and the shift encoding (rows N..2N-1 -> S_k), an elementwise product
/// layer pairing X_k with S_k, and an additive output layer holding the
/// inverse-DFT coefficients with the 1/N scaling. All transfers are the
/// identity; the weights are exactly the twiddle factors.
struct AnalyticShiftNetwork {
    int N = 0;
    nn::CMatrix dft_weights;      // 2N x 2N
    nn::CMatrix product_pairing;  // N x 2N, rows with two unit entries (X_k, S_k)
    nn::CMatrix inverse_weights;  // N x N, includes the 1/N factor
};

AnalyticShiftNetwork build_analytic_network(int N);

/// Forward pass of the analytic network. The middle layer is evaluated as
/// the exact elementwise product X_k * S_k of its paired inputs (zero DFT
/// coefficients are routine here, so the log-based product-unit path does
/// not apply).
std::vector<Complex> evaluate_analytic_raw(const AnalyticShiftNetwork& net,
                                           const std::vector<Complex>& input);

struct AnalyticEvaluation {
    std::vector<double> output;   // real parts of the network output
    double max_abs_error = 0.0;   // vs. the instance target
    double max_imag = 0.0;        // largest imaginary leakage
};

AnalyticEvaluation evaluate_analytic(const AnalyticShiftNetwork& net, const ShiftInstance& inst);

/// Concatenated (x, s) as a complex input vector.
std::vector<Complex> instance_input(const ShiftInstance& inst);

nn::Sample instance_sample(const ShiftInstance& inst);

/// Loss of the analytic network under the trainer's loss function; the
/// analytic solution is a global optimum, so this is numerically zero.
double analytic_network_loss(int N, const std::vector<ShiftInstance>& instances,
                             double imag_penalty = 1.0);

/// Trainable network of the same shape: additive 2N -> 2N, split-iterate
/// 2N -> N (free n parameters, starting additive at 0), additive N -> N;
/// all identity transfers, weights randomly initialized from the seed.
nn::Network build_trainable_network(int N, uint64_t seed);

struct ShiftTrainResult {
    std::vector<nn::TrainTrace> traces; // one per trial
    std::vector<double> initial_loss;
    std::vector<double> final_loss;
    std::vector<double> n_hat_movement;   // max |n_hat - 0| after training, per trial
    std::vector<double> n_tilde_movement; // max |n_tilde - 0|
    int improved_trials = 0;              // final < initial
};

/// Trains the split-iterate network on generated instances; reports loss
/// traces and how far the middle-layer iterate parameters moved. Makes no
/// claim that training recovers the analytic solution.
ShiftTrainResult train_on_shift_task(int N, int trials, int epochs, double learning_rate,
                                     uint64_t seed, int instances_per_trial = 24);

} // namespace iterexp::shift
