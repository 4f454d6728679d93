#include <iterexp/serialize.hpp>

#include <stdexcept>

namespace iterexp::nn {

namespace {

using nlohmann::json;

json matrix_to_json(const CMatrix& W) {
    json rows = json::array();
    for (int i = 0; i < W.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < W.cols; ++j)
            row.push_back({W.at(i, j).real(), W.at(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json& j, int rows, int cols) {
    CMatrix W(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c)
            W.at(i, c) = Complex{j.at(i).at(c).at(0).get<double>(),
                                 j.at(i).at(c).at(1).get<double>()};
    return W;
}

const char* sigma_name(TransferKind k) {
    return k == TransferKind::identity ? "identity" : "logistic";
}

TransferKind sigma_from(const std::string& s) {
    if (s == "identity") return TransferKind::identity;
    if (s == "logistic") return TransferKind::logistic;
    throw std::invalid_argument("unknown transfer kind: " + s);
}

json backend_to_json(const Backend& b) {
    json j;
    if (b.kind() == BackendKind::abel_real) {
        j["kind"] = "abel";
        j["max_iter_k"] = b.abel_config().max_iter_k;
        j["overflow_guard"] = b.abel_config().overflow_guard;
    } else {
        const auto& cfg = b.schroeder_context().config;
        j["kind"] = "schroeder";
        j["beta"] = cfg.branch.beta;
        j["r0"] = cfg.r0;
        j["max_iter"] = cfg.max_iter;
        j["singular_eps"] = cfg.singular_eps;
        j["overflow_guard"] = cfg.overflow_guard;
    }
    return j;
}

Backend backend_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "abel") {
        abel::AbelConfig cfg;
        cfg.max_iter_k = j.at("max_iter_k").get<int>();
        cfg.overflow_guard = j.at("overflow_guard").get<double>();
        return Backend::abel(cfg);
    }
    if (kind == "schroeder") {
        schroeder::SchroederConfig cfg;
        cfg.branch.beta = j.at("beta").get<double>();
        cfg.r0 = j.at("r0").get<double>();
        cfg.max_iter = j.at("max_iter").get<int>();
        cfg.singular_eps = j.at("singular_eps").get<double>();
        cfg.overflow_guard = j.at("overflow_guard").get<double>();
        return Backend::schroeder(cfg);
    }
    throw std::invalid_argument("unknown backend kind: " + kind);
}

} // namespace

nlohmann::json to_json(const Layer& layer) {
    json j;
    j["kind"] = kind_name(layer);
    j["out_dim"] = out_dim(layer);
    j["in_dim"] = in_dim(layer);
    std::visit(
        [&](const auto& l) {
            j["weights"] = matrix_to_json(l.W);
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, AdditiveLayer>) {
                j["sigma"] = sigma_name(l.sigma);
            } else if constexpr (std::is_same_v<T, ProductLayer>) {
                j["beta"] = l.branch.beta;
            } else if constexpr (std::is_same_v<T, AddiplicationLayer>) {
                j["sigma"] = sigma_name(l.sigma);
                j["n"] = l.n;
                j["backend"] = backend_to_json(l.backend);
            } else if constexpr (std::is_same_v<T, SplitIterateLayer>) {
                j["sigma"] = sigma_name(l.sigma);
                j["n_hat"] = l.n_hat;
                j["n_tilde"] = l.n_tilde;
                j["backend"] = backend_to_json(l.backend);
            }
        },
        layer);
    return j;
}

Layer layer_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    int rows = j.at("out_dim").get<int>();
    int cols = j.at("in_dim").get<int>();
    CMatrix W = matrix_from_json(j.at("weights"), rows, cols);
    if (kind == "additive")
        return AdditiveLayer{std::move(W), sigma_from(j.at("sigma").get<std::string>())};
    if (kind == "product")
        return ProductLayer{std::move(W), schroeder::Branch{j.at("beta").get<double>()}};
    if (kind == "addiplication")
        return AddiplicationLayer{std::move(W), j.at("n").get<std::vector<double>>(),
                                  sigma_from(j.at("sigma").get<std::string>()),
                                  backend_from_json(j.at("backend"))};
    if (kind == "split_iterate")
        return SplitIterateLayer{std::move(W), j.at("n_hat").get<std::vector<double>>(),
                                 j.at("n_tilde").get<std::vector<double>>(),
                                 sigma_from(j.at("sigma").get<std::string>()),
                                 backend_from_json(j.at("backend"))};
    throw std::invalid_argument("unknown layer kind: " + kind);
}

nlohmann::json to_json(const Network& net) {
    json layers = json::array();
    for (const Layer& l : net) layers.push_back(to_json(l));
    return json{{"layers", std::move(layers)}};
}

Network network_from_json(const nlohmann::json& j) {
    Network net;
    for (const auto& lj : j.at("layers")) net.push_back(layer_from_json(lj));
    return net;
}

} // namespace iterexp::nn
