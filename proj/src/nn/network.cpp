#include "pdeonet/nn/network.hpp"

#include "pdeonet/nn/errors.hpp"

#include <algorithm>
#include <string>

namespace pdeonet::nn {

SparseMatrix make_sparse(int rows, int cols, std::span<const Triplet> entries)
{
    std::vector<Eigen::Triplet<double, int>> list;
    list.reserve(entries.size());
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw ShapeError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        if (t.value != 0.0)
            list.emplace_back(t.row, t.col, t.value);
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(list.begin(), list.end());
    m.prune(0.0, 0.0);
    m.makeCompressed();
    return m;
}

SparseMatrix make_sparse(const Eigen::MatrixXd& dense)
{
    SparseMatrix m = dense.sparseView(0.0, 0.0);
    m.prune(0.0, 0.0);
    m.makeCompressed();
    return m;
}

std::vector<Triplet> triplets_of(const SparseMatrix& m)
{
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (int r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
            out.push_back({r, static_cast<int>(it.col()), it.value()});
    return out;
}

std::size_t Layer::size() const
{
    auto nnz_bias = std::count_if(bias.begin(), bias.end(), [](double b) { return b != 0.0; });
    return static_cast<std::size_t>(weight.nonZeros()) + static_cast<std::size_t>(nnz_bias);
}

namespace {

bool sorted_rows(const SparseMatrix& m)
{
    const int* outer = m.outerIndexPtr();
    const int* inner = m.innerIndexPtr();
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
        for (int k = outer[r] + 1; k < outer[r + 1]; ++k)
            if (inner[k - 1] >= inner[k])
                return false;
    return true;
}

} // namespace

Network::Network(int input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers))
{
    if (input_dim_ <= 0)
        throw ShapeError("network input dimension must be positive");
    if (layers_.empty())
        throw ShapeError("network needs at least one layer");
    int prev = input_dim_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto& layer = layers_[l];
        if (layer.cols() != prev)
            throw ShapeError("layer " + std::to_string(l + 1) + " expects " +
                             std::to_string(layer.cols()) + " inputs, previous layer has " +
                             std::to_string(prev));
        if (static_cast<int>(layer.bias.size()) != layer.rows())
            throw ShapeError("layer " + std::to_string(l + 1) + " bias length mismatch");
        if (layer.rows() <= 0)
            throw ShapeError("layer " + std::to_string(l + 1) + " has no neurons");
        layer.weight.prune(0.0, 0.0);
        layer.weight.makeCompressed();
        // column indices must be sorted within each row: that fixes the
        // accumulation order used by apply_affine
        if (!sorted_rows(layer.weight)) {
            Eigen::SparseMatrix<double, Eigen::ColMajor, int> by_col = layer.weight;
            layer.weight = by_col;
            layer.weight.makeCompressed();
        }
        prev = layer.rows();
    }
}

std::vector<Layer> Network::release() &&
{
    return std::move(layers_);
}

std::size_t Network::size() const
{
    std::size_t total = 0;
    for (const auto& l : layers_)
        total += l.size();
    return total;
}

std::size_t Network::layer_size(int j) const
{
    if (j < 1 || j > depth())
        throw ShapeError("layer index out of range");
    return layers_[static_cast<std::size_t>(j - 1)].size();
}

std::size_t Network::neurons() const
{
    std::size_t n = static_cast<std::size_t>(input_dim_);
    for (const auto& l : layers_)
        n += static_cast<std::size_t>(l.rows());
    return n;
}

int Network::max_width() const
{
    int w = input_dim_;
    for (const auto& l : layers_)
        w = std::max(w, l.rows());
    return w;
}

void apply_affine(const Layer& layer, std::span<const double> x, std::span<double> y)
{
    const auto& w = layer.weight;
    const int* outer = w.outerIndexPtr();
    const int* inner = w.innerIndexPtr();
    const double* val = w.valuePtr();
    for (int r = 0; r < w.rows(); ++r) {
        double acc = layer.bias[static_cast<std::size_t>(r)];
        for (int k = outer[r]; k < outer[r + 1]; ++k)
            acc += val[k] * x[static_cast<std::size_t>(inner[k])];
        y[static_cast<std::size_t>(r)] = acc;
    }
}

std::vector<double> Network::realize(std::span<const double> x) const
{
    if (static_cast<int>(x.size()) != input_dim_)
        throw ShapeError("network input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(input_dim_));
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        next.assign(static_cast<std::size_t>(layers_[l].rows()), 0.0);
        apply_affine(layers_[l], cur, next);
        if (l + 1 < layers_.size())
            for (double& v : next)
                v = v > 0.0 ? v : 0.0;
        cur.swap(next);
    }
    return cur;
}

} // namespace pdeonet::nn
