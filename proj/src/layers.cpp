#include <iterexp/layers.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iterexp::nn {

namespace {

Complex conj(Complex z) { return std::conj(z); }

void require_dim(int got, int want, const char* where) {
    if (got != want)
        throw DimensionError(std::string(where) + ": expected dimension " + std::to_string(want) +
                             ", got " + std::to_string(got));
}

// Backend errors are rethrown with the neuron/input index attached.
template <typename F>
auto at_index(const char* what, int index, F&& f) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw DomainError(std::string(what) + " " + std::to_string(index) + ": " + e.what());
    } catch (const OverflowError& e) {
        throw OverflowError(std::string(what) + " " + std::to_string(index) + ": " + e.what());
    } catch (const SingularDerivativeError& e) {
        throw SingularDerivativeError(std::string(what) + " " + std::to_string(index) + ": " +
                                      e.what());
    } catch (const NoConvergenceError& e) {
        throw NoConvergenceError(std::string(what) + " " + std::to_string(index) + ": " + e.what());
    }
}

} // namespace

Complex transfer(Complex t, TransferKind kind) {
    if (kind == TransferKind::identity) return t;
    return 1.0 / (1.0 + std::exp(-t));
}

Complex transfer_derivative(Complex t, TransferKind kind) {
    if (kind == TransferKind::identity) return Complex{1.0, 0.0};
    Complex s = transfer(t, TransferKind::logistic);
    return s * (1.0 - s);
}

CMatrix random_init(int rows, int cols, std::mt19937& rng) {
    CMatrix W(rows, cols);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& w : W.data) w = Complex{dist(rng) * scale, 0.0};
    return W;
}

int in_dim(const Layer& layer) {
    return std::visit([](const auto& l) { return l.W.cols; }, layer);
}

int out_dim(const Layer& layer) {
    return std::visit([](const auto& l) { return l.W.rows; }, layer);
}

const char* kind_name(const Layer& layer) {
    struct Visitor {
        const char* operator()(const AdditiveLayer&) const { return "additive"; }
        const char* operator()(const ProductLayer&) const { return "product"; }
        const char* operator()(const AddiplicationLayer&) const { return "addiplication"; }
        const char* operator()(const SplitIterateLayer&) const { return "split_iterate"; }
    };
    return std::visit(Visitor{}, layer);
}

namespace {

std::vector<Complex> matvec(const CMatrix& W, std::span<const Complex> x) {
    std::vector<Complex> y(W.rows, Complex{0.0, 0.0});
    for (int i = 0; i < W.rows; ++i)
        for (int j = 0; j < W.cols; ++j) y[i] += W.at(i, j) * x[j];
    return y;
}

void apply_transfer(const std::vector<Complex>& u, TransferKind sigma, ForwardCache& cache) {
    cache.pre_transfer = u;
    cache.output.resize(u.size());
    for (size_t i = 0; i < u.size(); ++i) cache.output[i] = transfer(u[i], sigma);
}

void forward_impl(const AdditiveLayer& l, std::span<const Complex> x, ForwardCache& cache) {
    cache.tilde.assign(x.begin(), x.end());
    cache.sums = matvec(l.W, x);
    apply_transfer(cache.sums, l.sigma, cache);
}

void forward_impl(const ProductLayer& l, std::span<const Complex> x, ForwardCache& cache) {
    cache.tilde.resize(x.size());
    for (size_t j = 0; j < x.size(); ++j)
        cache.tilde[j] = at_index("product layer: input", static_cast<int>(j),
                                  [&] { return schroeder::branch_log(x[j], l.branch); });
    cache.sums = matvec(l.W, cache.tilde);
    cache.pre_transfer = cache.sums;
    cache.output.resize(cache.sums.size());
    for (size_t i = 0; i < cache.sums.size(); ++i) cache.output[i] = std::exp(cache.sums[i]);
}

void forward_impl(const AddiplicationLayer& l, std::span<const Complex> x, ForwardCache& cache) {
    require_dim(static_cast<int>(l.n.size()), l.W.rows, "addiplication layer n");
    int out = l.W.rows, in = l.W.cols;
    cache.inner = CMatrix(out, in);
    cache.inner_d_dz = CMatrix(out, in);
    cache.inner_d_dn = CMatrix(out, in);
    cache.sums.assign(out, Complex{0.0, 0.0});
    cache.outer_d_dz.resize(out);
    cache.outer_d_dn.resize(out);
    std::vector<Complex> u(out);
    for (int i = 0; i < out; ++i) {
        at_index("addiplication layer: neuron", i, [&] {
            for (int j = 0; j < in; ++j) {
                auto d = l.backend.exp_iter_derivatives(x[j], -l.n[i]);
                cache.inner.at(i, j) = d.value;
                cache.inner_d_dz.at(i, j) = d.d_dz;
                cache.inner_d_dn.at(i, j) = d.d_dn;
                cache.sums[i] += l.W.at(i, j) * d.value;
            }
            auto outer = l.backend.exp_iter_derivatives(cache.sums[i], l.n[i]);
            u[i] = outer.value;
            cache.outer_d_dz[i] = outer.d_dz;
            cache.outer_d_dn[i] = outer.d_dn;
            return 0;
        });
    }
    apply_transfer(u, l.sigma, cache);
}

void forward_impl(const SplitIterateLayer& l, std::span<const Complex> x, ForwardCache& cache) {
    require_dim(static_cast<int>(l.n_hat.size()), l.W.rows, "split layer n_hat");
    require_dim(static_cast<int>(l.n_tilde.size()), l.W.cols, "split layer n_tilde");
    int out = l.W.rows, in = l.W.cols;
    cache.tilde.resize(in);
    cache.tilde_d_dz.resize(in);
    cache.tilde_d_dn.resize(in);
    for (int j = 0; j < in; ++j) {
        auto d = at_index("split layer: input", j,
                          [&] { return l.backend.exp_iter_derivatives(x[j], l.n_tilde[j]); });
        cache.tilde[j] = d.value;
        cache.tilde_d_dz[j] = d.d_dz;
        cache.tilde_d_dn[j] = d.d_dn;
    }
    cache.sums = matvec(l.W, cache.tilde);
    cache.outer_d_dz.resize(out);
    cache.outer_d_dn.resize(out);
    std::vector<Complex> u(out);
    for (int i = 0; i < out; ++i) {
        auto d = at_index("split layer: neuron", i,
                          [&] { return l.backend.exp_iter_derivatives(cache.sums[i], l.n_hat[i]); });
        u[i] = d.value;
        cache.outer_d_dz[i] = d.d_dz;
        cache.outer_d_dn[i] = d.d_dn;
    }
    apply_transfer(u, l.sigma, cache);
}

} // namespace

std::vector<Complex> forward(const Layer& layer, std::span<const Complex> x, ForwardCache& cache) {
    require_dim(static_cast<int>(x.size()), in_dim(layer), "layer input");
    cache = ForwardCache{};
    cache.input.assign(x.begin(), x.end());
    std::visit([&](const auto& l) { forward_impl(l, x, cache); }, layer);
    return cache.output;
}

std::vector<Complex> forward(const Layer& layer, std::span<const Complex> x) {
    ForwardCache cache;
    return forward(layer, x, cache);
}

namespace {

// Cotangent of the pre-transfer values from the upstream output cotangent.
std::vector<Complex> through_transfer(const ForwardCache& cache, TransferKind sigma,
                                      std::span<const Complex> upstream) {
    std::vector<Complex> g(upstream.size());
    for (size_t i = 0; i < upstream.size(); ++i)
        g[i] = conj(transfer_derivative(cache.pre_transfer[i], sigma)) * upstream[i];
    return g;
}

LayerGradients backward_impl(const AdditiveLayer& l, const ForwardCache& cache,
                             std::span<const Complex> upstream) {
    LayerGradients g;
    std::vector<Complex> gu = through_transfer(cache, l.sigma, upstream);
    g.d_W = CMatrix(l.W.rows, l.W.cols);
    g.d_input.assign(l.W.cols, Complex{0.0, 0.0});
    for (int i = 0; i < l.W.rows; ++i) {
        for (int j = 0; j < l.W.cols; ++j) {
            g.d_W.at(i, j) = conj(cache.input[j]) * gu[i];
            g.d_input[j] += conj(l.W.at(i, j)) * gu[i];
        }
    }
    return g;
}

LayerGradients backward_impl(const ProductLayer& l, const ForwardCache& cache,
                             std::span<const Complex> upstream) {
    LayerGradients g;
    g.d_W = CMatrix(l.W.rows, l.W.cols);
    g.d_input.assign(l.W.cols, Complex{0.0, 0.0});
    std::vector<Complex> g_tilde(l.W.cols, Complex{0.0, 0.0});
    for (int i = 0; i < l.W.rows; ++i) {
        Complex ga = conj(cache.output[i]) * upstream[i]; // d exp(A)/dA = exp(A)
        for (int j = 0; j < l.W.cols; ++j) {
            g.d_W.at(i, j) = conj(cache.tilde[j]) * ga;
            g_tilde[j] += conj(l.W.at(i, j)) * ga;
        }
    }
    for (int j = 0; j < l.W.cols; ++j)
        g.d_input[j] = conj(1.0 / cache.input[j]) * g_tilde[j]; // d log(x)/dx = 1/x
    return g;
}

LayerGradients backward_impl(const AddiplicationLayer& l, const ForwardCache& cache,
                             std::span<const Complex> upstream) {
    LayerGradients g;
    std::vector<Complex> gu = through_transfer(cache, l.sigma, upstream);
    g.d_W = CMatrix(l.W.rows, l.W.cols);
    g.d_n.assign(l.W.rows, 0.0);
    g.d_input.assign(l.W.cols, Complex{0.0, 0.0});
    for (int i = 0; i < l.W.rows; ++i) {
        // d u_i / d n_i: the outer iterate order moves with +1, every inner
        // order with -1 (m = -n_i).
        Complex du_dn = cache.outer_d_dn[i];
        Complex inner_shift{0.0, 0.0};
        for (int j = 0; j < l.W.cols; ++j)
            inner_shift += l.W.at(i, j) * (-cache.inner_d_dn.at(i, j));
        du_dn += cache.outer_d_dz[i] * inner_shift;
        g.d_n[i] = std::real(conj(gu[i]) * du_dn);

        Complex ga = conj(cache.outer_d_dz[i]) * gu[i];
        for (int j = 0; j < l.W.cols; ++j) {
            g.d_W.at(i, j) = conj(cache.inner.at(i, j)) * ga;
            g.d_input[j] += conj(l.W.at(i, j) * cache.inner_d_dz.at(i, j)) * ga;
        }
    }
    return g;
}

LayerGradients backward_impl(const SplitIterateLayer& l, const ForwardCache& cache,
                             std::span<const Complex> upstream) {
    LayerGradients g;
    std::vector<Complex> gu = through_transfer(cache, l.sigma, upstream);
    g.d_W = CMatrix(l.W.rows, l.W.cols);
    g.d_n_hat.assign(l.W.rows, 0.0);
    g.d_n_tilde.assign(l.W.cols, 0.0);
    g.d_input.assign(l.W.cols, Complex{0.0, 0.0});
    std::vector<Complex> g_tilde(l.W.cols, Complex{0.0, 0.0});
    for (int i = 0; i < l.W.rows; ++i) {
        g.d_n_hat[i] = std::real(conj(gu[i]) * cache.outer_d_dn[i]);
        Complex ga = conj(cache.outer_d_dz[i]) * gu[i];
        for (int j = 0; j < l.W.cols; ++j) {
            g.d_W.at(i, j) = conj(cache.tilde[j]) * ga;
            g_tilde[j] += conj(l.W.at(i, j)) * ga;
        }
    }
    for (int j = 0; j < l.W.cols; ++j) {
        g.d_n_tilde[j] = std::real(conj(g_tilde[j]) * cache.tilde_d_dn[j]);
        g.d_input[j] = conj(cache.tilde_d_dz[j]) * g_tilde[j];
    }
    return g;
}

} // namespace

LayerGradients backward(const Layer& layer, const ForwardCache& cache,
                        std::span<const Complex> upstream) {
    require_dim(static_cast<int>(upstream.size()), out_dim(layer), "layer upstream gradient");
    return std::visit([&](const auto& l) { return backward_impl(l, cache, upstream); }, layer);
}

Complex parameterized_transfer(Complex t, double n_hat, double n_tilde, TransferKind sigma,
                               const Backend& backend) {
    return backend.exp_iter(transfer(backend.exp_iter(t, n_hat), sigma), n_tilde);
}

double loss_and_cotangent(std::span<const Complex> y, std::span<const double> target,
                          double lambda, std::vector<Complex>& cotangent) {
    require_dim(static_cast<int>(y.size()), static_cast<int>(target.size()), "loss target");
    cotangent.resize(y.size());
    double loss = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        double re = y[i].real() - target[i];
        double im = y[i].imag();
        loss += re * re + lambda * im * im;
        cotangent[i] = Complex{2.0 * re, 2.0 * lambda * im};
    }
    return loss;
}

namespace {

struct ParamRef {
    std::string name;
    double* p;       // scalar inside the probe layer
    double analytic; // matching entry of the analytic gradient
};

template <typename T>
bool abel_backed(const T& l) {
    if constexpr (std::is_same_v<T, AddiplicationLayer> || std::is_same_v<T, SplitIterateLayer>)
        return l.backend.kind() == BackendKind::abel_real;
    else
        return false;
}

// Enumerates every trainable scalar of `probe` alongside its analytic
// gradient. Layers on the real-line backend keep their weights real, so
// the structurally-zero imaginary parts are not enumerated.
std::vector<ParamRef> trainable_params(Layer& probe, const LayerGradients& g) {
    std::vector<ParamRef> refs;
    std::visit(
        [&](auto& l) {
            using T = std::decay_t<decltype(l)>;
            bool real_weights = abel_backed(l);
            for (int i = 0; i < l.W.rows; ++i) {
                for (int j = 0; j < l.W.cols; ++j) {
                    std::string base = "W[" + std::to_string(i) + "][" + std::to_string(j) + "]";
                    // std::complex<double> is layout-compatible with double[2]
                    auto* parts = reinterpret_cast<double*>(&l.W.at(i, j));
                    const Complex& dw = g.d_W.at(i, j);
                    refs.push_back({base + ".re", parts, dw.real()});
                    if (!real_weights) refs.push_back({base + ".im", parts + 1, dw.imag()});
                }
            }
            auto add_vector = [&refs](std::vector<double>& v, const std::vector<double>& dv,
                                      const char* name) {
                for (size_t i = 0; i < v.size(); ++i)
                    refs.push_back({std::string(name) + "[" + std::to_string(i) + "]", &v[i],
                                    dv[i]});
            };
            if constexpr (std::is_same_v<T, AddiplicationLayer>) add_vector(l.n, g.d_n, "n");
            if constexpr (std::is_same_v<T, SplitIterateLayer>) {
                add_vector(l.n_hat, g.d_n_hat, "n_hat");
                add_vector(l.n_tilde, g.d_n_tilde, "n_tilde");
            }
        },
        probe);
    return refs;
}

} // namespace

GradCheckReport grad_check(const Layer& layer, std::span<const Complex> x, unsigned loss_seed,
                           double eps) {
    if (eps < 1e-8 || eps > 1e-4)
        throw std::invalid_argument("grad_check: eps must lie in [1e-8, 1e-4]");

    std::mt19937 rng(loss_seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> target(out_dim(layer));
    for (auto& t : target) t = dist(rng);

    ForwardCache cache;
    std::vector<Complex> y = forward(layer, x, cache);
    std::vector<Complex> cotangent;
    loss_and_cotangent(y, target, 1.0, cotangent);
    LayerGradients analytic = backward(layer, cache, cotangent);

    Layer probe = layer; // mutable copy for finite differences
    std::vector<ParamRef> refs = trainable_params(probe, analytic);

    auto eval_loss = [&]() {
        std::vector<Complex> out = forward(probe, x);
        std::vector<Complex> unused;
        return loss_and_cotangent(out, target, 1.0, unused);
    };

    GradCheckReport report;
    report.entries.reserve(refs.size());
    for (size_t r = 0; r < refs.size(); ++r) {
        GradCheckEntry entry;
        entry.parameter = refs[r].name;
        entry.analytic = refs[r].analytic;
        double saved = *refs[r].p;
        try {
            auto central = [&](double h) {
                *refs[r].p = saved + h;
                double up = eval_loss();
                *refs[r].p = saved - h;
                double down = eval_loss();
                return (up - down) / (2.0 * h);
            };
            // Several step sizes. When the stencils straddle a k-region seam
            // of the piecewise iterate (or the quotient is dominated by
            // evaluation noise), the estimates scatter and the entry is
            // flagged rather than compared: the oracle cannot adjudicate
            // there. The estimates never look at the analytic value, so a
            // wrong analytic gradient is not masked, and the median damps
            // the ~1e-9 relative evaluation noise of the iterate machinery.
            double fd[5];
            for (int k = 0; k < 5; ++k) fd[k] = central(eps * (1.0 - 0.15 * k));
            double lo = *std::min_element(fd, fd + 5);
            double hi = *std::max_element(fd, fd + 5);
            std::nth_element(fd, fd + 2, fd + 5);
            double scale = std::max({std::abs(lo), std::abs(hi), std::abs(entry.analytic), 1e-12});
            if (hi - lo > 1.6e-4 * scale) {
                entry.singular = true;
                ++report.singular_count;
            } else {
                entry.numeric = fd[2];
                entry.rel_error =
                    std::abs(entry.analytic - entry.numeric) /
                    std::max({std::abs(entry.analytic), std::abs(entry.numeric), 1e-12});
            }
        } catch (const Error&) {
            entry.singular = true;
            ++report.singular_count;
        }
        *refs[r].p = saved;
        if (!entry.singular)
            report.worst_rel_error = std::max(report.worst_rel_error, entry.rel_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

std::vector<Complex> forward_network(const Network& net, std::span<const Complex> x) {
    std::vector<Complex> v(x.begin(), x.end());
    for (const Layer& layer : net) v = forward(layer, v);
    return v;
}

TrainTrace sgd_train(Network& net, const Dataset& data, const TrainConfig& config) {
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate))
        throw std::invalid_argument("sgd_train: learning rate must be finite and >= 0");

    TrainTrace trace;
    trace.loss.reserve(config.epochs);
    trace.skipped.reserve(config.epochs);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<LayerGradients> grads(net.size());
        std::vector<bool> grads_initialized(net.size(), false);
        double epoch_loss = 0.0;
        int used = 0, skipped = 0;

        for (const Sample& sample : data) {
            std::vector<ForwardCache> caches(net.size());
            std::vector<Complex> v(sample.input);
            try {
                for (size_t li = 0; li < net.size(); ++li) v = forward(net[li], v, caches[li]);
                std::vector<Complex> cotangent;
                double loss =
                    loss_and_cotangent(v, sample.target, config.imag_penalty, cotangent);
                for (size_t li = net.size(); li-- > 0;) {
                    LayerGradients g = backward(net[li], caches[li], cotangent);
                    cotangent = g.d_input;
                    if (!grads_initialized[li]) {
                        grads[li] = std::move(g);
                        grads_initialized[li] = true;
                    } else {
                        auto& acc = grads[li];
                        for (size_t k = 0; k < acc.d_W.data.size(); ++k)
                            acc.d_W.data[k] += g.d_W.data[k];
                        for (size_t k = 0; k < acc.d_n.size(); ++k) acc.d_n[k] += g.d_n[k];
                        for (size_t k = 0; k < acc.d_n_hat.size(); ++k)
                            acc.d_n_hat[k] += g.d_n_hat[k];
                        for (size_t k = 0; k < acc.d_n_tilde.size(); ++k)
                            acc.d_n_tilde[k] += g.d_n_tilde[k];
                    }
                }
                epoch_loss += loss;
                ++used;
            } catch (const Error&) {
                ++skipped; // branch cuts are measure-zero but reachable
            }
        }

        double mean_loss = used > 0 ? epoch_loss / used : 0.0;
        if (!std::isfinite(mean_loss))
            throw DivergedError("sgd_train: loss became non-finite at epoch " +
                                std::to_string(epoch));
        trace.loss.push_back(mean_loss);
        trace.skipped.push_back(skipped);

        if (config.learning_rate == 0.0 || used == 0) continue;
        double step = config.learning_rate / used;
        for (size_t li = 0; li < net.size(); ++li) {
            if (!grads_initialized[li]) continue;
            const LayerGradients& g = grads[li];
            std::visit(
                [&](auto& l) {
                    // Packed gradient: Re/Im components step independently.
                    for (size_t k = 0; k < l.W.data.size(); ++k)
                        l.W.data[k] -= step * g.d_W.data[k];
                    using T = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<T, AddiplicationLayer>) {
                        for (size_t k = 0; k < l.n.size(); ++k) l.n[k] -= step * g.d_n[k];
                    }
                    if constexpr (std::is_same_v<T, SplitIterateLayer>) {
                        for (size_t k = 0; k < l.n_hat.size(); ++k)
                            l.n_hat[k] -= step * g.d_n_hat[k];
                        for (size_t k = 0; k < l.n_tilde.size(); ++k)
                            l.n_tilde[k] -= step * g.d_n_tilde[k];
                    }
                },
                net[li]);
        }
    }
    return trace;
}

} // namespace iterexp::nn
