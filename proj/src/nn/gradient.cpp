#include "pdeonet/nn/calculus.hpp"

#include "pdeonet/nn/errors.hpp"

#include <string>

namespace pdeonet::nn {

std::vector<double> realize_with_jacobian(const Network& net, std::span<const double> x,
                                          Eigen::MatrixXd& jacobian)
{
    if (static_cast<int>(x.size()) != net.input_dim())
        throw ShapeError("network input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(net.input_dim()));
    std::vector<double> cur(x.begin(), x.end()), next;
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(net.input_dim(), net.input_dim());
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        next.assign(static_cast<std::size_t>(layers[l].rows()), 0.0);
        apply_affine(layers[l], cur, next);
        Eigen::MatrixXd Jn = layers[l].weight * J;
        if (l + 1 < layers.size())
            for (std::size_t r = 0; r < next.size(); ++r)
                if (next[r] <= 0.0) {
                    next[r] = 0.0;
                    Jn.row(static_cast<Eigen::Index>(r)).setZero();
                }
        cur.swap(next);
        J.swap(Jn);
    }
    jacobian = std::move(J);
    return cur;
}

Eigen::MatrixXd net_gradient(const Network& net, std::span<const double> x)
{
    Eigen::MatrixXd J;
    realize_with_jacobian(net, x, J);
    return J;
}

} // namespace pdeonet::nn
