#include "pdeonet/nn/calculus.hpp"

#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdeonet::nn {

namespace {

void require_spec(const ApproxSpec& spec)
{
    if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
        throw PreconditionError("epsilon must lie in (0,1), got " + std::to_string(spec.epsilon));
    if (!(spec.bound >= 1.0))
        throw PreconditionError("bound must be >= 1, got " + std::to_string(spec.bound));
}

} // namespace

int sawtooth_steps(double epsilon, double bound)
{
    // |sq error| <= R^2 2^{-2m-2} with R = 2M; the product halves the
    // difference of two such errors once more (kept as 2^{-2m-3} for margin)
    const double R = 2.0 * bound;
    const double m = std::ceil((std::log2(R * R / epsilon) - 3.0) / 2.0);
    return std::max(1, static_cast<int>(m));
}

Network product_net(const ApproxSpec& spec)
{
    require_spec(spec);
    const int m = sawtooth_steps(spec.epsilon, spec.bound);
    const double R = 2.0 * spec.bound;

    // layer 1: relu(+-(x+y)), relu(+-(x-y)), channels interleaved
    std::vector<Layer> layers;
    {
        std::vector<Triplet> t = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, -1.0},
                                  {2, 0, -1.0}, {2, 1, -1.0}, {3, 0, -1.0}, {3, 1, 1.0}};
        layers.push_back({make_sparse(4, 2, t), std::vector<double>(4, 0.0)});
    }
    // layer 2: h1 = relu(s), h2 = relu(s - 1/2) with s = |t|/R
    {
        std::vector<Triplet> t;
        for (int c = 0; c < 2; ++c) {
            t.push_back({c, c, 1.0 / R});
            t.push_back({c, c + 2, 1.0 / R});
            t.push_back({2 + c, c, 1.0 / R});
            t.push_back({2 + c, c + 2, 1.0 / R});
        }
        layers.push_back({make_sparse(4, 4, t), {0.0, 0.0, -0.5, -0.5}});
    }
    // acc = cA a + cH1 h1 + cH2 h2 approximates s^2; g = 2 h1 - 4 h2
    double cA = 0.0, cH1 = 0.5, cH2 = 1.0;
    double scale = 0.25;
    for (int k = 2; k <= m; ++k) {
        scale *= 0.25;
        const bool has_a = k > 2;
        const int cols = has_a ? 6 : 4;
        std::vector<Triplet> t;
        for (int c = 0; c < 2; ++c) {
            t.push_back({c, c, 2.0});
            t.push_back({c, 2 + c, -4.0});
            t.push_back({2 + c, c, 2.0});
            t.push_back({2 + c, 2 + c, -4.0});
            t.push_back({4 + c, c, cH1});
            t.push_back({4 + c, 2 + c, cH2});
            if (has_a)
                t.push_back({4 + c, 4 + c, cA});
        }
        layers.push_back({make_sparse(6, cols, t), {0.0, 0.0, -0.5, -0.5, 0.0, 0.0}});
        cA = 1.0;
        cH1 = -2.0 * scale;
        cH2 = 4.0 * scale;
    }
    // output (R^2/4)(acc_1 - acc_2); columns pair up so equal channels cancel exactly
    {
        const double w = R * R / 4.0;
        const int cols = m >= 2 ? 6 : 4;
        std::vector<Triplet> t = {{0, 0, w * cH1}, {0, 1, -w * cH1}, {0, 2, w * cH2}, {0, 3, -w * cH2}};
        if (m >= 2) {
            t.push_back({0, 4, w * cA});
            t.push_back({0, 5, -w * cA});
        }
        layers.push_back({make_sparse(1, cols, t), {0.0}});
    }
    return Network(2, std::move(layers));
}

Network matmul_net(int n, int m, int l, const ApproxSpec& spec)
{
    require_spec(spec);
    if (n < 1 || m < 1 || l < 1)
        throw ShapeError("matmul_net needs positive dimensions");
    const Network prod = product_net({spec.epsilon / m, spec.bound, spec.delta});
    const int in_dim = n * m + m * l;
    const int count = n * m * l;
    // selection: product (i, j, k) reads B_ik and C_kj
    std::vector<Triplet> sel;
    sel.reserve(static_cast<std::size_t>(2 * count));
    int r = 0;
    for (int j = 0; j < l; ++j)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < m; ++k) {
                sel.push_back({r++, i + n * k, 1.0});
                sel.push_back({r++, n * m + k + m * j, 1.0});
            }
    const Network select(in_dim, {Layer{make_sparse(2 * count, in_dim, sel), std::vector<double>(2 * static_cast<std::size_t>(count), 0.0)}});
    std::vector<Network> copies(static_cast<std::size_t>(count), prod);
    const Network products = concat(parallelize(copies, InputSharing::stacked), select);
    std::vector<Triplet> sum;
    sum.reserve(static_cast<std::size_t>(count));
    r = 0;
    for (int out = 0; out < n * l; ++out)
        for (int k = 0; k < m; ++k)
            sum.push_back({out, r++, 1.0});
    const Network summation(count, {Layer{make_sparse(n * l, count, sum), std::vector<double>(static_cast<std::size_t>(n * l), 0.0)}});
    return concat(summation, products);
}

int m_terms(double epsilon, double delta)
{
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw PreconditionError("m_terms needs epsilon, delta in (0,1)");
    const double ratio = std::log(0.5 * epsilon * delta) / std::log(1.0 - delta);
    // tolerance keeps exact integers (up to rounding) from jumping up by one
    const double m = std::ceil(ratio - 1e-12 * std::max(1.0, ratio));
    return std::max(1, static_cast<int>(m));
}

} // namespace pdeonet::nn
