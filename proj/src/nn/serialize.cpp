#include "pdeonet/nn/serialize.hpp"

#include "pdeonet/nn/errors.hpp"

#include <fstream>
#include <stdexcept>

namespace pdeonet::nn {

nlohmann::json to_json(const Network& net)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net.layers()) {
        nlohmann::json weights = nlohmann::json::array();
        for (const auto& t : triplets_of(layer.weight))
            weights.push_back({t.row, t.col, t.value});
        layers.push_back({{"rows", layer.rows()},
                          {"cols", layer.cols()},
                          {"weights", std::move(weights)},
                          {"bias", layer.bias}});
    }
    return {{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

Network network_from_json(const nlohmann::json& doc)
{
    try {
        const int input_dim = doc.at("input_dim").get<int>();
        std::vector<Layer> layers;
        for (const auto& l : doc.at("layers")) {
            const int rows = l.at("rows").get<int>();
            const int cols = l.at("cols").get<int>();
            std::vector<Triplet> t;
            for (const auto& w : l.at("weights"))
                t.push_back({w.at(0).get<int>(), w.at(1).get<int>(), w.at(2).get<double>()});
            layers.push_back({make_sparse(rows, cols, t), l.at("bias").get<std::vector<double>>()});
        }
        return Network(input_dim, std::move(layers));
    } catch (const nlohmann::json::exception& e) {
        throw ShapeError(std::string("malformed network document: ") + e.what());
    }
}

void save_network(const Network& net, const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("cannot open " + file.string() + " for writing");
    out << to_json(net).dump() << '\n';
    if (!out)
        throw std::runtime_error("write to " + file.string() + " failed");
}

Network load_network(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("cannot open " + file.string());
    return network_from_json(nlohmann::json::parse(in));
}

} // namespace pdeonet::nn
