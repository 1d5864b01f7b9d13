#include "pdeonet/nn/compose.hpp"

#include "pdeonet/nn/errors.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <string>

namespace pdeonet::nn {

namespace {

SparseMatrix identity_sparse(int n)
{
    SparseMatrix m(n, n);
    m.setIdentity();
    m.makeCompressed();
    return m;
}

// [I; -I] : R^n -> R^{2n}
SparseMatrix split_matrix(int n)
{
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 1.0});
        t.push_back({n + i, i, -1.0});
    }
    return make_sparse(2 * n, n, t);
}

// [I, -I] : R^{2n} -> R^n
SparseMatrix merge_matrix(int n)
{
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 1.0});
        t.push_back({i, n + i, -1.0});
    }
    return make_sparse(n, 2 * n, t);
}

std::vector<double> matvec(const SparseMatrix& m, const std::vector<double>& v)
{
    std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
    Layer tmp{m, std::vector<double>(static_cast<std::size_t>(m.rows()), 0.0)};
    apply_affine(tmp, v, out);
    return out;
}

void require_compatible(const Network& outer, const Network& inner, const char* what)
{
    if (inner.output_dim() != outer.input_dim())
        throw ShapeError(std::string(what) + ": inner output dimension " +
                         std::to_string(inner.output_dim()) + " != outer input dimension " +
                         std::to_string(outer.input_dim()));
}

SparseMatrix block_diagonal(std::span<const SparseMatrix* const> blocks)
{
    int rows = 0;
    int cols = 0;
    std::vector<Triplet> t;
    for (const SparseMatrix* b : blocks) {
        for (const auto& e : triplets_of(*b))
            t.push_back({rows + e.row, cols + e.col, e.value});
        rows += static_cast<int>(b->rows());
        cols += static_cast<int>(b->cols());
    }
    return make_sparse(rows, cols, t);
}

SparseMatrix vertical_stack(std::span<const SparseMatrix* const> blocks)
{
    int rows = 0;
    const int cols = static_cast<int>(blocks.front()->cols());
    std::vector<Triplet> t;
    for (const SparseMatrix* b : blocks) {
        for (const auto& e : triplets_of(*b))
            t.push_back({rows + e.row, e.col, e.value});
        rows += static_cast<int>(b->rows());
    }
    return make_sparse(rows, cols, t);
}

Network pad_to_depth(const Network& net, int depth)
{
    if (net.depth() >= depth)
        return net;
    return concat(identity_net(net.output_dim(), depth - net.depth() + 1), net);
}

} // namespace

Network affine_net(const Eigen::MatrixXd& M, const Eigen::VectorXd& b)
{
    if (M.rows() != b.size())
        throw ShapeError("affine_net: bias length does not match matrix rows");
    std::vector<double> bias(b.data(), b.data() + b.size());
    return Network(static_cast<int>(M.cols()), {Layer{make_sparse(M), std::move(bias)}});
}

Network affine_net(SparseMatrix M, std::vector<double> b)
{
    if (M.rows() != static_cast<Eigen::Index>(b.size()))
        throw ShapeError("affine_net: bias length does not match matrix rows");
    const int cols = static_cast<int>(M.cols());
    return Network(cols, {Layer{std::move(M), std::move(b)}});
}

Network identity_net(int dim, int depth)
{
    if (dim <= 0)
        throw ShapeError("identity_net: dimension must be positive");
    if (depth < 1)
        throw PreconditionError("identity_net: depth must be >= 1");
    const auto n = static_cast<std::size_t>(dim);
    if (depth == 1)
        return Network(dim, {Layer{identity_sparse(dim), std::vector<double>(n, 0.0)}});
    std::vector<Layer> layers;
    layers.push_back({split_matrix(dim), std::vector<double>(2 * n, 0.0)});
    for (int l = 1; l < depth - 1; ++l)
        layers.push_back({identity_sparse(2 * dim), std::vector<double>(2 * n, 0.0)});
    layers.push_back({merge_matrix(dim), std::vector<double>(n, 0.0)});
    return Network(dim, std::move(layers));
}

Network concat(Network outer, Network inner)
{
    require_compatible(outer, inner, "concat");
    const int input_dim = inner.input_dim();
    std::vector<Layer> layers = std::move(inner).release();
    std::vector<Layer> top = std::move(outer).release();
    const Layer last = std::move(layers.back());
    layers.pop_back();
    const Layer& first = top.front();
    SparseMatrix fused = first.weight * last.weight;
    fused.prune(0.0, 0.0);
    fused.makeCompressed();
    std::vector<double> bias = matvec(first.weight, last.bias);
    for (std::size_t i = 0; i < bias.size(); ++i)
        bias[i] += first.bias[i];
    layers.push_back({std::move(fused), std::move(bias)});
    std::move(top.begin() + 1, top.end(), std::back_inserter(layers));
    return Network(input_dim, std::move(layers));
}

Network sparse_concat(Network outer, Network inner)
{
    require_compatible(outer, inner, "sparse_concat");
    const int input_dim = inner.input_dim();
    const int n = inner.output_dim();
    std::vector<Layer> layers = std::move(inner).release();
    std::vector<Layer> top = std::move(outer).release();
    const Layer last = std::move(layers.back());
    layers.pop_back();

    SparseMatrix down = split_matrix(n) * last.weight;
    down.makeCompressed();
    std::vector<double> down_bias(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        down_bias[static_cast<std::size_t>(i)] = last.bias[static_cast<std::size_t>(i)];
        down_bias[static_cast<std::size_t>(n + i)] = -last.bias[static_cast<std::size_t>(i)];
    }
    layers.push_back({std::move(down), std::move(down_bias)});

    Layer& first = top.front();
    SparseMatrix up = first.weight * merge_matrix(n);
    up.makeCompressed();
    layers.push_back({std::move(up), std::move(first.bias)});
    std::move(top.begin() + 1, top.end(), std::back_inserter(layers));
    return Network(input_dim, std::move(layers));
}

Network parallelize(std::span<const Network> nets, InputSharing sharing)
{
    if (nets.empty())
        throw PreconditionError("parallelize: empty sequence of networks");
    if (sharing == InputSharing::shared) {
        for (const auto& n : nets)
            if (n.input_dim() != nets.front().input_dim())
                throw ShapeError("parallelize: shared input requires equal input dimensions");
    }
    int depth = 0;
    for (const auto& n : nets)
        depth = std::max(depth, n.depth());
    std::vector<Network> padded;
    padded.reserve(nets.size());
    for (const auto& n : nets)
        padded.push_back(pad_to_depth(n, depth));

    std::vector<Layer> layers;
    for (int l = 0; l < depth; ++l) {
        std::vector<const SparseMatrix*> blocks;
        std::vector<double> bias;
        for (const auto& n : padded) {
            const Layer& layer = n.layers()[static_cast<std::size_t>(l)];
            blocks.push_back(&layer.weight);
            bias.insert(bias.end(), layer.bias.begin(), layer.bias.end());
        }
        SparseMatrix w = (l == 0 && sharing == InputSharing::shared) ? vertical_stack(blocks)
                                                                    : block_diagonal(blocks);
        layers.push_back({std::move(w), std::move(bias)});
    }
    int input_dim = nets.front().input_dim();
    if (sharing == InputSharing::stacked)
        input_dim = std::accumulate(nets.begin(), nets.end(), 0,
                                    [](int acc, const Network& n) { return acc + n.input_dim(); });
    return Network(input_dim, std::move(layers));
}

std::size_t padding_cost(std::span<const Network> nets)
{
    int depth = 0;
    for (const auto& n : nets)
        depth = std::max(depth, n.depth());
    std::size_t extra = 0;
    for (const auto& n : nets) {
        const std::size_t padded = pad_to_depth(n, depth).size();
        if (padded > n.size())
            extra += padded - n.size();
    }
    return extra;
}

} // namespace pdeonet::nn
