#pragma once

#include "pdeonet/nn/calculus.hpp"
#include "pdeonet/nn/network.hpp"
#include "pdeonet/spectral/basis.hpp"
#include "pdeonet/spectral/coefficient.hpp"
#include "pdeonet/spectral/expr.hpp"
#include "pdeonet/spectral/quadrature.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pdeonet::onet {

// Coercivity / continuity of the coefficient class; alpha = 1/(C_coer + C_cont),
// delta = alpha C_coer.
struct ClassBounds {
    double coercivity = 1.0;
    double continuity = 1.0;

    double alpha() const { return 1.0 / (coercivity + continuity); }
    double delta() const { return coercivity / (coercivity + continuity); }
    static ClassBounds of(const spectral::CoefficientField& coef);
};

// Input layout of a branch network for a basis with/without the constant mode.
// Scalar: a(x_1..x_n). Reaction-diffusion: vec A(x_k) for every k, then c(x_1..x_n).
int branch_input_dim(const spectral::PeriodicBasis& basis, const spectral::QuadratureRule& quad);

// n x n matrix from a column-major vector of length n^2
Eigen::MatrixXd matricize(std::span<const double> v, int n);

// One affine layer with output vec(-alpha A^a) when fed the sampled coefficient.
// A basis carrying the constant mode selects the reaction-diffusion layout.
nn::Network input_layer_net(const spectral::PeriodicBasis& basis, const spectral::QuadratureRule& quad,
                            double alpha);

// left:      vec(Id - alpha (A^1)^{-1} A^a)
// symmetric: vec(Id - alpha S^{-1} A^a S^{-1}), S = (A^1)^{1/2}; similar to the
//            left form but symmetric, so its 2-norm equals its spectral radius.
enum class Preconditioning { left, symmetric };

nn::Network preconditioned_input_net(const spectral::PeriodicBasis& basis,
                                     const spectral::QuadratureRule& quad, double alpha,
                                     Preconditioning mode = Preconditioning::left);

struct BranchInfo {
    Preconditioning mode = Preconditioning::symmetric;
    double alpha = 0.0;
    double delta = 0.0;
    double eps_inv = 0.0;        // target on ||(A~)^{-1} - out||_2
    double inner_epsilon = 0.0;  // accuracy handed to inversion_net
    double transform_condition = 1.0; // cond(S) in symmetric mode
    double rhs_norm = 0.0;       // ||c~_f||_2, branch_coeff_net only
    double eps_u = 0.0;
    nn::InversionInfo inversion;
};

// Output approximates vec((A~^a)^{-1}), A~^a = (A^1)^{-1} A^a.
nn::Network branch_inversion_net(const spectral::PeriodicBasis& basis, const spectral::QuadratureRule& quad,
                                 double eps_inv, const ClassBounds& bounds, BranchInfo* info = nullptr,
                                 Preconditioning mode = Preconditioning::symmetric);

// Output approximates c_u = (A^a)^{-1} c_f to eps_u in the 2-norm.
nn::Network branch_coeff_net(const spectral::PeriodicBasis& basis, const spectral::QuadratureRule& quad,
                             const spectral::Expr& f, double eps_u, const ClassBounds& bounds,
                             BranchInfo* info = nullptr, Preconditioning mode = Preconditioning::symmetric);

// Same with a precomputed c_f.
nn::Network branch_coeff_net(const spectral::PeriodicBasis& basis, const spectral::QuadratureRule& quad,
                             const Eigen::VectorXd& c_f, double eps_u, const ClassBounds& bounds,
                             BranchInfo* info = nullptr, Preconditioning mode = Preconditioning::symmetric);

} // namespace pdeonet::onet
