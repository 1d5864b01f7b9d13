#pragma once

#include "pdeonet/nn/network.hpp"

#include <random>
#include <vector>

namespace testing_util {

// dense-ish random net with given widths; ~30% zero weights
inline pdeonet::nn::Network random_net(std::mt19937_64& rng, std::vector<int> widths)
{
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<pdeonet::nn::Layer> layers;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        Eigen::MatrixXd W(widths[l], widths[l - 1]);
        for (Eigen::Index k = 0; k < W.size(); ++k)
            W.data()[k] = u(rng) < 0.3 ? 0.0 : g(rng);
        std::vector<double> b(static_cast<std::size_t>(widths[l]));
        for (auto& v : b)
            v = 0.5 * g(rng);
        layers.push_back({pdeonet::nn::make_sparse(W), b});
    }
    return pdeonet::nn::Network(widths.front(), std::move(layers));
}

inline std::vector<int> random_widths(std::mt19937_64& rng, int in, int out, int max_depth = 4, int max_width = 6)
{
    std::uniform_int_distribution<int> depth(1, max_depth), width(1, max_width);
    std::vector<int> w{in};
    const int L = depth(rng);
    for (int l = 1; l < L; ++l)
        w.push_back(width(rng));
    w.push_back(out);
    return w;
}

inline std::vector<double> random_point(std::mt19937_64& rng, int n, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x)
        v = u(rng);
    return x;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / std::max(den, 1.0);
}

} // namespace testing_util
