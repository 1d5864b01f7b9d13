#pragma once

#include <Eigen/Dense>

#include <span>

namespace pdeonet::spectral {

// Tensor-product rule on [0,1]^d. Node k is column k of `nodes`; the first
// coordinate varies fastest.
struct QuadratureRule {
    int q = 0;  // points per axis
    int d = 0;
    Eigen::MatrixXd nodes;   // d x n
    Eigen::VectorXd weights; // n

    int size() const { return static_cast<int>(weights.size()); }
    std::span<const double> node(int k) const
    {
        return {nodes.data() + static_cast<Eigen::Index>(k) * d, static_cast<std::size_t>(d)};
    }
};

struct Rule1d {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// q-point Gauss-Lobatto rule on [0,1], exact up to degree 2q-3.
Rule1d gauss_lobatto_1d(int q);
// n-point Gauss-Legendre rule on [0,1], exact up to degree 2n-1.
Rule1d gauss_legendre_1d(int n);
// `cells` equal subintervals of [0,1], n Gauss-Legendre points each.
Rule1d composite_gauss_1d(int cells, int n);

QuadratureRule tensorize(const Rule1d& rule, int d);

QuadratureRule gauss_lobatto(int q, int d);
QuadratureRule gauss_legendre(int n, int d);
QuadratureRule composite_gauss(int cells, int n, int d);

} // namespace pdeonet::spectral
