#include <iterexp/shift_task.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace iterexp::shift {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Complex twiddle(double k, double n, int N, double sign) {
    double angle = sign * two_pi * k * n / static_cast<double>(N);
    return Complex{std::cos(angle), std::sin(angle)};
}

} // namespace

ShiftInstance make_instance(const std::vector<int>& x, int m) {
    int N = static_cast<int>(x.size());
    if (N < 1) throw std::invalid_argument("shift: pattern must be nonempty");
    if (m < 0 || m >= N) throw std::invalid_argument("shift: m must lie in [0, N-1]");
    ShiftInstance inst;
    inst.x = x;
    inst.m = m;
    inst.s.assign(N, 0);
    inst.s[m] = 1;
    inst.y.resize(N);
    for (int n = 0; n < N; ++n) inst.y[n] = x[((n - m) % N + N) % N];
    return inst;
}

ShiftInstance generate_instance(int N, uint64_t seed) {
    if (N < 1) throw std::invalid_argument("shift: N must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<int> x(N);
    for (auto& b : x) b = bit(rng);
    std::uniform_int_distribution<int> shift(0, N - 1);
    return make_instance(x, shift(rng));
}

std::vector<Complex> dft(const std::vector<Complex>& v) {
    if (v.empty()) throw std::invalid_argument("dft: empty input");
    int N = static_cast<int>(v.size());
    std::vector<Complex> out(N, Complex{0.0, 0.0});
    for (int k = 0; k < N; ++k)
        for (int n = 0; n < N; ++n) out[k] += v[n] * twiddle(k, n, N, -1.0);
    return out;
}

std::vector<Complex> inverse_dft(const std::vector<Complex>& v) {
    if (v.empty()) throw std::invalid_argument("inverse_dft: empty input");
    int N = static_cast<int>(v.size());
    std::vector<Complex> out(N, Complex{0.0, 0.0});
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < N; ++k) out[n] += v[k] * twiddle(k, n, N, 1.0);
        out[n] /= static_cast<double>(N);
    }
    return out;
}

AnalyticShiftNetwork build_analytic_network(int N) {
    if (N < 1) throw std::invalid_argument("shift: N must be >= 1");
    AnalyticShiftNetwork net;
    net.N = N;
    net.dft_weights = nn::CMatrix(2 * N, 2 * N);
    for (int k = 0; k < N; ++k) {
        for (int n = 0; n < N; ++n) {
            net.dft_weights.at(k, n) = twiddle(k, n, N, -1.0);         // X_k from x
            net.dft_weights.at(N + k, N + n) = twiddle(k, n, N, -1.0); // S_k from s
        }
    }
    net.product_pairing = nn::CMatrix(N, 2 * N);
    for (int k = 0; k < N; ++k) {
        net.product_pairing.at(k, k) = Complex{1.0, 0.0};     // X_k
        net.product_pairing.at(k, N + k) = Complex{1.0, 0.0}; // S_k
    }
    net.inverse_weights = nn::CMatrix(N, N);
    for (int v = 0; v < N; ++v)
        for (int k = 0; k < N; ++k)
            net.inverse_weights.at(v, k) = twiddle(k, v, N, 1.0) / static_cast<double>(N);
    return net;
}

std::vector<Complex> instance_input(const ShiftInstance& inst) {
    std::vector<Complex> input;
    input.reserve(2 * inst.size());
    for (int b : inst.x) input.emplace_back(static_cast<double>(b), 0.0);
    for (int b : inst.s) input.emplace_back(static_cast<double>(b), 0.0);
    return input;
}

nn::Sample instance_sample(const ShiftInstance& inst) {
    nn::Sample sample;
    sample.input = instance_input(inst);
    sample.target.reserve(inst.size());
    for (int b : inst.y) sample.target.push_back(static_cast<double>(b));
    return sample;
}

std::vector<Complex> evaluate_analytic_raw(const AnalyticShiftNetwork& net,
                                           const std::vector<Complex>& input) {
    int N = net.N;
    if (static_cast<int>(input.size()) != 2 * N)
        throw DimensionError("shift: analytic network expects a 2N input");

    std::vector<Complex> hidden1(2 * N, Complex{0.0, 0.0});
    for (int i = 0; i < 2 * N; ++i)
        for (int j = 0; j < 2 * N; ++j) hidden1[i] += net.dft_weights.at(i, j) * input[j];

    // Exact paired products X_k * S_k.
    std::vector<Complex> hidden2(N);
    for (int k = 0; k < N; ++k) hidden2[k] = hidden1[k] * hidden1[N + k];

    std::vector<Complex> out(N, Complex{0.0, 0.0});
    for (int v = 0; v < N; ++v)
        for (int k = 0; k < N; ++k) out[v] += net.inverse_weights.at(v, k) * hidden2[k];
    return out;
}

AnalyticEvaluation evaluate_analytic(const AnalyticShiftNetwork& net, const ShiftInstance& inst) {
    if (inst.size() != net.N) throw DimensionError("shift: instance size differs from network N");
    std::vector<Complex> out = evaluate_analytic_raw(net, instance_input(inst));
    AnalyticEvaluation eval;
    eval.output.reserve(net.N);
    for (int v = 0; v < net.N; ++v) {
        eval.output.push_back(out[v].real());
        eval.max_abs_error =
            std::max(eval.max_abs_error, std::abs(out[v].real() - inst.y[v]));
        eval.max_imag = std::max(eval.max_imag, std::abs(out[v].imag()));
    }
    return eval;
}

double analytic_network_loss(int N, const std::vector<ShiftInstance>& instances,
                             double imag_penalty) {
    AnalyticShiftNetwork net = build_analytic_network(N);
    double total = 0.0;
    for (const ShiftInstance& inst : instances) {
        std::vector<Complex> out = evaluate_analytic_raw(net, instance_input(inst));
        std::vector<Complex> unused;
        nn::Sample sample = instance_sample(inst);
        total += nn::loss_and_cotangent(out, sample.target, imag_penalty, unused);
    }
    return instances.empty() ? 0.0 : total / static_cast<double>(instances.size());
}

nn::Network build_trainable_network(int N, uint64_t seed) {
    std::mt19937 rng(static_cast<unsigned>(seed));
    nn::Network net;
    net.push_back(nn::AdditiveLayer{nn::random_init(2 * N, 2 * N, rng), nn::TransferKind::identity});
    nn::SplitIterateLayer middle;
    middle.W = nn::random_init(N, 2 * N, rng);
    middle.n_hat.assign(N, 0.0);
    middle.n_tilde.assign(2 * N, 0.0);
    middle.sigma = nn::TransferKind::identity;
    middle.backend = Backend::schroeder();
    net.push_back(std::move(middle));
    net.push_back(nn::AdditiveLayer{nn::random_init(N, N, rng), nn::TransferKind::identity});
    return net;
}

ShiftTrainResult train_on_shift_task(int N, int trials, int epochs, double learning_rate,
                                     uint64_t seed, int instances_per_trial) {
    if (N > 8) throw std::invalid_argument("shift: training harness is desk-scale, N <= 8");
    ShiftTrainResult result;
    for (int trial = 0; trial < trials; ++trial) {
        uint64_t trial_seed = seed + 1000003ull * static_cast<uint64_t>(trial);
        nn::Dataset data;
        for (int i = 0; i < instances_per_trial; ++i)
            data.push_back(instance_sample(
                generate_instance(N, trial_seed * 65537ull + static_cast<uint64_t>(i))));

        nn::Network net = build_trainable_network(N, trial_seed);
        nn::TrainConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.epochs = epochs;
        nn::TrainTrace trace = nn::sgd_train(net, data, cfg);

        const auto& middle = std::get<nn::SplitIterateLayer>(net[1]);
        double hat_move = 0.0, tilde_move = 0.0;
        for (double v : middle.n_hat) hat_move = std::max(hat_move, std::abs(v));
        for (double v : middle.n_tilde) tilde_move = std::max(tilde_move, std::abs(v));

        result.initial_loss.push_back(trace.loss.front());
        result.final_loss.push_back(trace.loss.back());
        result.n_hat_movement.push_back(hat_move);
        result.n_tilde_movement.push_back(tilde_move);
        if (trace.loss.back() < trace.loss.front()) ++result.improved_trials;
        result.traces.push_back(std::move(trace));
    }
    return result;
}

} // namespace iterexp::shift
