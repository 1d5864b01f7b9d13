#pragma once

#include "pdeonet/nn/network.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pdeonet::nn {

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc);

void save_network(const Network& net, const std::filesystem::path& file);
Network load_network(const std::filesystem::path& file);

} // namespace pdeonet::nn
