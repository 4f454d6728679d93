#pragma once

#include <iterexp/layers.hpp>

#include <json.hpp>

namespace iterexp::nn {

/// JSON round-trip for layers and networks: layer kind, dimensions, weights
/// as [re, im] pairs, n-parameter arrays, transfer kind and backend config.
nlohmann::json to_json(const Layer& layer);
Layer layer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

} // namespace iterexp::nn
