#pragma once

#include "pdeonet/nn/network.hpp"

#include <Eigen/Dense>

#include <span>

namespace pdeonet::nn {

/// Single-layer network realizing x -> M x + b.
Network affine_net(const Eigen::MatrixXd& M, const Eigen::VectorXd& b);
Network affine_net(SparseMatrix M, std::vector<double> b);

/// Exact identity on R^dim with the requested depth. Depth >= 2 routes every
/// coordinate through the split x = relu(x) - relu(-x).
Network identity_net(int dim, int depth);

/// outer . inner with the interface layers fused; depth L1 + L2 - 1.
Network concat(Network outer, Network inner);

/// outer (.) inner with an explicit identity interface; depth L1 + L2 and
/// size <= 2 size(outer) + 2 size(inner).
Network sparse_concat(Network outer, Network inner);

enum class InputSharing { shared, stacked };

/// Runs several networks side by side and concatenates their outputs.
/// Shallower members are padded with identity layers up to the largest
/// depth. With `shared` all members read the same input; with `stacked` the
/// input is the concatenation of the member inputs.
Network parallelize(std::span<const Network> nets, InputSharing sharing);

/// Nonzeros added by identity padding when the given nets are parallelized.
std::size_t padding_cost(std::span<const Network> nets);

} // namespace pdeonet::nn
