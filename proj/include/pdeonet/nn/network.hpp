#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <span>
#include <vector>

namespace pdeonet::nn {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Builds a compressed sparse matrix; duplicate entries are summed and exact
/// zeros are dropped, so `nonZeros()` always equals the count of stored
/// nonzero weights.
SparseMatrix make_sparse(int rows, int cols, std::span<const Triplet> entries);
SparseMatrix make_sparse(const Eigen::MatrixXd& dense);
std::vector<Triplet> triplets_of(const SparseMatrix& m);

/// One affine map x -> W x + b of a feed-forward network.
struct Layer {
    SparseMatrix weight;
    std::vector<double> bias;

    int rows() const { return static_cast<int>(weight.rows()); }
    int cols() const { return static_cast<int>(weight.cols()); }
    std::size_t size() const;
};

/// Feed-forward ReLU network ((A_1, b_1), ..., (A_L, b_L)).
///
/// The realization applies ReLU after every layer except the last. Networks
/// are immutable once constructed; realization is a pure function and may be
/// called concurrently.
class Network {
public:
    Network(int input_dim, std::vector<Layer> layers);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return layers_.back().rows(); }
    int depth() const { return static_cast<int>(layers_.size()); }

    /// Number of stored nonzero weights and biases.
    std::size_t size() const;
    /// Nonzeros of layer `j` (1-based, as in size_j).
    std::size_t layer_size(int j) const;
    /// d + sum of layer widths.
    std::size_t neurons() const;
    /// Widest layer, including the input.
    int max_width() const;

    const std::vector<Layer>& layers() const { return layers_; }
    /// Moves the layers out; the network is left empty.
    std::vector<Layer> release() &&;
    const Layer& layer(int j) const { return layers_.at(static_cast<std::size_t>(j)); }

    std::vector<double> realize(std::span<const double> x) const;
    std::vector<double> operator()(std::span<const double> x) const { return realize(x); }

private:
    int input_dim_;
    std::vector<Layer> layers_;
};

/// y = W x + b, accumulated row by row in column order starting from b.
void apply_affine(const Layer& layer, std::span<const double> x, std::span<double> y);

} // namespace pdeonet::nn
