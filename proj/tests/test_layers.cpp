#include <iterexp/layers.hpp>
#include <iterexp/serialize.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace iterexp;
using namespace iterexp::nn;
using doctest::Approx;

namespace {

const Backend& sb() {
    static Backend b = Backend::schroeder();
    return b;
}

double rel_diff(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CMatrix matrix(int rows, int cols, std::initializer_list<double> entries) {
    CMatrix W(rows, cols);
    auto it = entries.begin();
    for (auto& w : W.data) w = Complex{*it++, 0.0};
    return W;
}

std::vector<Complex> cvec(std::initializer_list<double> xs) {
    std::vector<Complex> v;
    for (double x : xs) v.emplace_back(x, 0.0);
    return v;
}

} // namespace

TEST_CASE("transfer: identity and logistic") {
    CHECK(transfer({3.5, -1.2}, TransferKind::identity) == Complex{3.5, -1.2});
    CHECK(transfer({0, 0}, TransferKind::logistic) == Complex{0.5, 0.0});
    CHECK(transfer({2, 0}, TransferKind::logistic).real() ==
          Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
    // Holomorphic derivative sigma(1 - sigma) vs central difference.
    Complex t{0.7, 0.3};
    double h = 1e-6;
    Complex fd = (transfer(t + h, TransferKind::logistic) - transfer(t - h, TransferKind::logistic)) /
                 (2.0 * h);
    CHECK(rel_diff(transfer_derivative(t, TransferKind::logistic), fd) < 1e-8);
}

TEST_CASE("forward additive") {
    AdditiveLayer eye{matrix(2, 2, {1, 0, 0, 1}), TransferKind::identity};
    auto y = forward(Layer{eye}, cvec({3, 4}));
    CHECK(y[0] == Complex{3, 0});
    CHECK(y[1] == Complex{4, 0});

    AdditiveLayer sum{matrix(1, 2, {1, 1}), TransferKind::identity};
    CHECK(forward(Layer{sum}, cvec({2, 7}))[0] == Complex{9, 0});

    AdditiveLayer zero{matrix(2, 3, {0, 0, 0, 0, 0, 0}), TransferKind::logistic};
    for (Complex v : forward(Layer{zero}, cvec({1, -2, 5}))) CHECK(v == Complex{0.5, 0.0});

    CHECK_THROWS_AS(forward(Layer{sum}, cvec({1, 2, 3})), DimensionError);
}

TEST_CASE("forward product") {
    ProductLayer pair{matrix(1, 2, {1, 1})};
    CHECK(rel_diff(forward(Layer{pair}, cvec({2, 7}))[0], {14, 0}) < 1e-12);

    ProductLayer square{matrix(1, 2, {2, 0})};
    CHECK(rel_diff(forward(Layer{square}, cvec({3, 5}))[0], {9, 0}) < 1e-12);

    // Negative input goes through the complex log branch:
    // exp(log(-2) + log 7) = -14.
    CHECK(rel_diff(forward(Layer{pair}, cvec({-2, 7}))[0], {-14, 0}) < 1e-12);

    CHECK_THROWS_AS(forward(Layer{pair}, cvec({0, 7})), DomainError);
}

TEST_CASE("forward addiplication: reduction to sum, product, binary operator") {
    AddiplicationLayer l{matrix(1, 2, {1, 1}), {0.0}, TransferKind::identity, sb()};
    CHECK(rel_diff(forward(Layer{l}, cvec({2, 7}))[0], {9, 0}) < 1e-6);

    l.n = {1.0};
    CHECK(rel_diff(forward(Layer{l}, cvec({2, 7}))[0], {14, 0}) < 1e-6);

    l.n = {0.5};
    Complex via_layer = forward(Layer{l}, cvec({2, 7}))[0];
    Complex via_operator = addiplicate({2, 0}, {7, 0}, 0.5, sb());
    CHECK(rel_diff(via_layer, via_operator) < 1e-12);
}

TEST_CASE("forward addiplication: random layers reduce at the endpoints") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> xd(0.3, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix W = random_init(2, 3, rng);
        auto x = cvec({xd(rng), xd(rng), xd(rng)});

        AddiplicationLayer at_zero{W, {0.0, 0.0}, TransferKind::logistic, sb()};
        AdditiveLayer additive{W, TransferKind::logistic};
        auto ya = forward(Layer{at_zero}, x);
        auto yb = forward(Layer{additive}, x);
        for (size_t i = 0; i < ya.size(); ++i) CHECK(rel_diff(ya[i], yb[i]) < 1e-6);

        CMatrix ones(1, 3);
        for (auto& w : ones.data) w = Complex{1.0, 0.0};
        AddiplicationLayer at_one{ones, {1.0}, TransferKind::identity, sb()};
        Complex expected = x[0] * x[1] * x[2];
        CHECK(rel_diff(forward(Layer{at_one}, x)[0], expected) < 1e-6);
    }
}

TEST_CASE("forward split: special cases and cross-layer agreement") {
    SplitIterateLayer l{matrix(1, 2, {1, 1}), {0.0}, {0.0, 0.0}, TransferKind::identity, sb()};
    CHECK(rel_diff(forward(Layer{l}, cvec({2, 7}))[0], {9, 0}) < 1e-6);

    l.n_hat = {1.0};
    l.n_tilde = {-1.0, -1.0};
    CHECK(rel_diff(forward(Layer{l}, cvec({2, 7}))[0], {14, 0}) < 1e-6);

    for (double n : {0.0, 0.25, 0.5, 1.0}) {
        SplitIterateLayer split{matrix(2, 2, {0.8, 0.3, -0.2, 1.1}),
                                {n, n},
                                {-n, -n},
                                TransferKind::identity,
                                sb()};
        AddiplicationLayer addip{split.W, {n, n}, TransferKind::identity, sb()};
        auto ys = forward(Layer{split}, cvec({1.5, 2.5}));
        auto ya = forward(Layer{addip}, cvec({1.5, 2.5}));
        CHECK(rel_diff(ys[0], ya[0]) < 1e-6);
        CHECK(rel_diff(ys[1], ya[1]) < 1e-6);
    }
}

TEST_CASE("parameterized transfer: plain sigma at zero orders, iterate round trip") {
    Complex t{1.3, 0.2};
    CHECK(parameterized_transfer(t, 0.0, 0.0, TransferKind::identity, sb()) == t);
    CHECK(parameterized_transfer({0, 0}, 0.0, 0.0, TransferKind::logistic, sb()) ==
          Complex{0.5, 0.0});
    CHECK(rel_diff(parameterized_transfer(t, 0.3, -0.3, TransferKind::identity, sb()), t) < 1e-6);
}

TEST_CASE("parameterized transfer: additive net with it reproduces the split layer exactly") {
    SplitIterateLayer split{matrix(2, 2, {0.7, -0.4, 0.2, 1.3}),
                            {0.35, -0.6},
                            {0.5, -0.25},
                            TransferKind::logistic,
                            sb()};
    auto x = cvec({1.4, 2.2});
    auto expected = forward(Layer{split}, x);

    // Post-transfer part of the previous (virtual) layer, then the plain
    // weighted sum, then the pre-transfer part of this layer.
    std::vector<Complex> tilde(2);
    for (int j = 0; j < 2; ++j)
        tilde[j] =
            parameterized_transfer(x[j], 0.0, split.n_tilde[j], TransferKind::identity, sb());
    AdditiveLayer weights{split.W, TransferKind::identity};
    auto sums = forward(Layer{weights}, tilde);
    for (int i = 0; i < 2; ++i) {
        Complex y =
            parameterized_transfer(sums[i], split.n_hat[i], 0.0, TransferKind::logistic, sb());
        CHECK(y == expected[i]); // identical arithmetic path
    }
}

TEST_CASE("backward: classical linear-layer gradients at zero orders") {
    SplitIterateLayer l{matrix(2, 2, {0.6, -0.3, 0.9, 0.4}),
                        {0.0, 0.0},
                        {0.0, 0.0},
                        TransferKind::identity,
                        sb()};
    auto x = cvec({1.5, -2.5});
    ForwardCache cache;
    forward(Layer{l}, x, cache);
    std::vector<Complex> upstream{{1.0, 0.0}, {-2.0, 0.0}}; // delta_i
    auto g = backward(Layer{l}, cache, upstream);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(rel_diff(g.d_W.at(i, j), upstream[i] * std::conj(x[j])) < 1e-6);
    // d_input = W^H upstream for a real W.
    CHECK(rel_diff(g.d_input[0], 0.6 * upstream[0] + 0.9 * upstream[1]) < 1e-6);
    CHECK(rel_diff(g.d_input[1], -0.3 * upstream[0] + 0.4 * upstream[1]) < 1e-6);
}

TEST_CASE("backward: product rule through a multiplicative neuron") {
    AddiplicationLayer l{matrix(1, 2, {1, 1}), {1.0}, TransferKind::identity, sb()};
    auto x = cvec({2, 7});
    ForwardCache cache;
    forward(Layer{l}, x, cache);
    auto g = backward(Layer{l}, cache, std::vector<Complex>{{1.0, 0.0}});
    // d y / d x_0 = x_1 (cotangent convention conjugates, values are real).
    CHECK(rel_diff(g.d_input[0], {7, 0}) < 1e-6);
    CHECK(rel_diff(g.d_input[1], {2, 0}) < 1e-6);
}

TEST_CASE("grad_check: 50 random configurations per layer kind stay under 1e-4") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> re(0.5, 2.5), im(-0.3, 0.3), nd(-1.0, 1.0);
    auto mkx = [&](int n, bool cplx) {
        std::vector<Complex> x(n);
        for (auto& v : x) v = {re(rng), cplx ? im(rng) : 0.0};
        return x;
    };

    int total_entries = 0, singular = 0;

    SUBCASE("additive and product layers are exact to FD noise") {
        double worst = 0.0;
        for (unsigned s = 0; s < 50; ++s) {
            Layer add{AdditiveLayer{random_init(2, 3, rng),
                                    s % 2 ? TransferKind::logistic : TransferKind::identity}};
            auto r = grad_check(add, mkx(3, true), s, 1e-6);
            worst = std::max(worst, r.worst_rel_error);
            Layer prod{ProductLayer{random_init(2, 3, rng)}};
            auto r2 = grad_check(prod, mkx(3, true), s, 1e-6);
            worst = std::max(worst, r2.worst_rel_error);
        }
        CHECK(worst < 1e-6);
    }

    SUBCASE("addiplication and split layers pass at the documented tolerance") {
        double worst_adp = 0.0, worst_spl = 0.0;
        for (unsigned s = 0; s < 50; ++s) {
            std::vector<double> nv = {nd(rng), nd(rng)};
            Layer adp{AddiplicationLayer{random_init(2, 3, rng), nv, TransferKind::identity, sb()}};
            auto r = grad_check(adp, mkx(3, true), s, 1e-4);
            worst_adp = std::max(worst_adp, r.worst_rel_error);
            total_entries += static_cast<int>(r.entries.size());
            singular += r.singular_count;

            std::vector<double> nh = {nd(rng), nd(rng)}, nt = {nd(rng), nd(rng), nd(rng)};
            Layer spl{SplitIterateLayer{random_init(2, 3, rng), nh, nt, TransferKind::identity,
                                        sb()}};
            auto r2 = grad_check(spl, mkx(3, true), s + 100, 1e-4);
            worst_spl = std::max(worst_spl, r2.worst_rel_error);
            total_entries += static_cast<int>(r2.entries.size());
            singular += r2.singular_count;
        }
        CHECK(worst_adp < 1e-4);
        CHECK(worst_spl < 1e-4);
        // Flagged branch-cut samples must stay rare.
        CHECK(singular * 10 < total_entries);
    }
}

TEST_CASE("grad_check: a plain linear layer is exact to rounding") {
    // Identity transfer makes the loss quadratic in W: central differences
    // carry no truncation term, only rounding over O(1) gradients.
    Layer linear{AdditiveLayer{matrix(2, 2, {0.8, -0.4, 0.3, 1.2}), TransferKind::identity}};
    auto report = grad_check(linear, cvec({1.5, 2.0}), 1, 1e-6);
    CHECK(report.singular_count == 0);
    CHECK(report.worst_rel_error < 1e-8);
}

TEST_CASE("grad_check: eps outside the supported window is rejected") {
    Layer l{AdditiveLayer{matrix(1, 1, {1}), TransferKind::identity}};
    CHECK_THROWS_AS(grad_check(l, cvec({1}), 0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(grad_check(l, cvec({1}), 0, 1e-3), std::invalid_argument);
}

TEST_CASE("grad_check: a branch-crossing stencil is flagged singular") {
    // Abel backend, n = -1.5: the outer iterate saturates to -infinity once
    // the weighted sum drops to 0.5. The probe weight leaves a margin of
    // 1e-3 above that edge, well inside the +-eps * inner finite-difference
    // swing, so the center evaluates but one wing must throw.
    Backend ab = Backend::abel();
    double inner = abel::exp_iter(2.0, 1.5).value();
    AddiplicationLayer l{matrix(1, 1, {0.501 / inner}), {-1.5}, TransferKind::identity, ab};
    auto report = grad_check(Layer{l}, cvec({2.0}), 7, 1e-4);
    CHECK(report.singular_count > 0);
    bool any_singular_entry = false;
    for (const auto& e : report.entries) any_singular_entry |= e.singular;
    CHECK(any_singular_entry);
}

TEST_CASE("loss_and_cotangent: value and packed gradient") {
    std::vector<Complex> y{{1.5, 0.5}, {-0.5, 0.0}};
    std::vector<double> target{1.0, 0.0};
    std::vector<Complex> cot;
    double loss = loss_and_cotangent(y, target, 2.0, cot);
    CHECK(loss == Approx(0.25 + 2.0 * 0.25 + 0.25).epsilon(1e-12));
    CHECK(cot[0] == Complex{1.0, 2.0});
    CHECK(cot[1] == Complex{-1.0, 0.0});
    CHECK_THROWS_AS(loss_and_cotangent(y, std::vector<double>{1.0}, 1.0, cot), DimensionError);
}

TEST_CASE("sgd_train: zero learning rate gives a flat trace") {
    std::mt19937 rng(3);
    Network net{Layer{AdditiveLayer{random_init(1, 2, rng), TransferKind::identity}}};
    Dataset data{{cvec({1, 2}), {1.0}}, {cvec({2, 1}), {0.0}}};
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    auto trace = sgd_train(net, data, cfg);
    REQUIRE(trace.loss.size() == 5);
    for (double l : trace.loss) CHECK(l == trace.loss.front());
}

TEST_CASE("sgd_train: convex additive regression descends monotonically") {
    std::mt19937 rng(5);
    Network net{Layer{AdditiveLayer{random_init(1, 2, rng), TransferKind::identity}}};
    Dataset data;
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 16; ++i) {
        double a = dist(rng), b = dist(rng);
        data.push_back({{{a, 0.0}, {b, 0.0}}, {0.7 * a - 0.3 * b}});
    }
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 50;
    auto trace = sgd_train(net, data, cfg);
    for (size_t e = 1; e < trace.loss.size(); ++e) CHECK(trace.loss[e] < trace.loss[e - 1]);
}

TEST_CASE("sgd_train: split layer learns toward a multiplication task") {
    std::mt19937 rng(7);
    SplitIterateLayer l;
    l.W = random_init(1, 2, rng);
    l.n_hat = {0.0};
    l.n_tilde = {0.0, 0.0};
    l.sigma = TransferKind::identity;
    l.backend = sb();
    Network net{Layer{l}};

    Dataset data;
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    for (int i = 0; i < 16; ++i) {
        double a = dist(rng), b = dist(rng);
        data.push_back({{{a, 0.0}, {b, 0.0}}, {a * b}});
    }
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 150;
    auto trace = sgd_train(net, data, cfg);
    CHECK(trace.loss.back() < trace.loss.front());
    const auto& trained = std::get<SplitIterateLayer>(net[0]);
    double moved = std::abs(trained.n_hat[0]) + std::abs(trained.n_tilde[0]) +
                   std::abs(trained.n_tilde[1]);
    CHECK(moved > 1e-3);
}

TEST_CASE("sgd_train: exploding loss raises Diverged") {
    std::mt19937 rng(9);
    Network net{Layer{AdditiveLayer{random_init(1, 1, rng), TransferKind::identity}}};
    Dataset data{{cvec({2}), {1.0}}};
    TrainConfig cfg;
    cfg.learning_rate = 1e12;
    cfg.epochs = 200;
    CHECK_THROWS_AS(sgd_train(net, data, cfg), DivergedError);
}

TEST_CASE("layer serialization round-trips forward outputs bitwise") {
    std::mt19937 rng(11);
    std::vector<Layer> layers;
    layers.push_back(AdditiveLayer{random_init(2, 3, rng), TransferKind::logistic});
    layers.push_back(ProductLayer{random_init(2, 3, rng)});
    layers.push_back(AddiplicationLayer{random_init(2, 3, rng), {0.25, -0.5},
                                        TransferKind::identity, sb()});
    layers.push_back(SplitIterateLayer{random_init(2, 3, rng), {0.3, -0.7},
                                       {0.1, 0.0, -0.2}, TransferKind::logistic, sb()});
    auto x = cvec({1.2, 0.8, 1.9});
    for (const Layer& layer : layers) {
        Layer restored = layer_from_json(to_json(layer));
        CHECK(kind_name(restored) == kind_name(layer));
        auto a = forward(layer, x);
        auto b = forward(restored, x);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }

    Network net{layers[0],
                SplitIterateLayer{random_init(1, 2, rng), {0.4}, {-0.1, 0.2},
                                  TransferKind::identity, sb()}};
    Network restored = network_from_json(to_json(net));
    auto ya = forward_network(net, x);
    auto yb = forward_network(restored, x);
    for (size_t i = 0; i < ya.size(); ++i) CHECK(ya[i] == yb[i]);
}

TEST_CASE("iterate-call counts match the architectural cost claim") {
    auto x3 = cvec({1.2, 0.8, 1.9});
    Backend counted = Backend::schroeder();

    SplitIterateLayer split{matrix(2, 3, {1, 0, 1, 0, 1, 0}), {0.3, 0.1},
                            {0.2, -0.1, 0.0}, TransferKind::identity, counted};
    counted.reset_iterate_count();
    forward(Layer{split}, x3);
    CHECK(counted.iterate_call_count() == 3 + 2); // in-dim + out-dim

    AddiplicationLayer addip{matrix(2, 3, {1, 0, 1, 0, 1, 0}), {0.3, 0.1},
                             TransferKind::identity, counted};
    counted.reset_iterate_count();
    forward(Layer{addip}, x3);
    CHECK(counted.iterate_call_count() == 3 * 2 + 2); // in-dim x out-dim + out-dim
}

TEST_CASE("forward errors carry the offending neuron index") {
    // Input 1.0 sits on the singular set for the inner iterate at order 1.
    SplitIterateLayer l{matrix(1, 2, {1, 1}), {0.0}, {-1.0, -1.0}, TransferKind::identity, sb()};
    try {
        forward(Layer{l}, cvec({2.0, 1.0}));
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("input 1") != std::string::npos);
    }
}
