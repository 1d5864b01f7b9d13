#pragma once

#include "pdeonet/spectral/basis.hpp"
#include "pdeonet/spectral/coefficient.hpp"
#include "pdeonet/spectral/expr.hpp"
#include "pdeonet/spectral/field.hpp"
#include "pdeonet/spectral/quadrature.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pdeonet::spectral {

// Basis values and gradients at the nodes of a rule: values is n x size(),
// grads[m] holds d/dx_m of every member.
struct BasisTables {
    Eigen::MatrixXd values;
    std::vector<Eigen::MatrixXd> grads;
};
BasisTables tabulate(const PeriodicBasis& basis, const QuadratureRule& rule);

struct DiscreteSystem {
    Eigen::MatrixXd stiffness;       // A^a
    Eigen::MatrixXd reference;       // A^1 (or the H1 Gram matrix with the constant mode)
    Eigen::MatrixXd preconditioned;  // (A^1)^{-1} A^a
    Eigen::VectorXd rhs;             // c_f
    Eigen::VectorXd preconditioned_rhs;
    Eigen::VectorXd solution;        // (A^a)^{-1} c_f
};

Eigen::MatrixXd stiffness_matrix(const CoefficientField& coef, const PeriodicBasis& basis,
                                 const QuadratureRule& quad);
Eigen::MatrixXd reference_matrix(const PeriodicBasis& basis, const QuadratureRule& quad);
// [M]_ij = sum_k w_k phi_i(x_k) phi_j(x_k); exact L2 Gram matrix when the rule
// integrates degree 2p (Gauss-Legendre with p+1 points)
Eigen::MatrixXd mass_matrix(const PeriodicBasis& basis, const QuadratureRule& quad);
// c_f by a Gauss-Lobatto rule of order q_f
Eigen::VectorXd load_vector(const PeriodicBasis& basis, const Expr& f, int q_f);

// Cholesky-type solve that rejects numerically singular matrices.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Requires q >= p+1 and, for pure diffusion, a zero-mean source.
DiscreteSystem assemble(const CoefficientField& coef, const PeriodicBasis& basis,
                        const QuadratureRule& quad, const Expr& f);

SolutionField galerkin_solve(const CoefficientField& coef, const Expr& f, int p, int q);

struct SpectrumBounds {
    double lambda_min;
    double lambda_max;
};
// extreme eigenvalues of A v = lambda B v through B^{-1/2} A B^{-1/2}
SpectrumBounds generalized_extremes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
SpectrumBounds spectrum_bounds(const DiscreteSystem& sys);

} // namespace pdeonet::spectral
