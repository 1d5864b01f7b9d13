#include "pdeonet/onet/branch.hpp"

#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/galerkin.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace pdeonet::onet {

using nn::Network;
using nn::Triplet;
using spectral::PeriodicBasis;
using spectral::QuadratureRule;

ClassBounds ClassBounds::of(const spectral::CoefficientField& coef)
{
    return {coef.coercivity(), coef.continuity()};
}

int branch_input_dim(const PeriodicBasis& basis, const QuadratureRule& quad)
{
    const int d = basis.d();
    return basis.with_constant() ? quad.size() * (d * d + 1) : quad.size();
}

Eigen::MatrixXd matricize(std::span<const double> v, int n)
{
    if (static_cast<int>(v.size()) != n * n)
        throw ShapeError("matricize: length " + std::to_string(v.size()) + " is not " +
                         std::to_string(n) + "^2");
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
}

namespace {

void require_quad(const PeriodicBasis& basis, const QuadratureRule& quad)
{
    if (quad.d != basis.d())
        throw ShapeError("quadrature dimension differs from basis dimension");
    if (quad.q < basis.p() + 1)
        throw PreconditionError("quadrature order q=" + std::to_string(quad.q) + " below p+1");
}

struct Transform {
    Eigen::MatrixXd left;   // applied as (Id (x) left) or (right (x) left)
    Eigen::MatrixXd right;
    double condition = 1.0;
    Eigen::MatrixXd S, S_inv;
};

Transform preconditioner(const PeriodicBasis& basis, const QuadratureRule& quad, Preconditioning mode)
{
    const Eigen::MatrixXd ref = spectral::reference_matrix(basis, quad);
    const int n = basis.size();
    Transform t;
    if (mode == Preconditioning::left) {
        t.left = spectral::spd_solve(ref, Eigen::MatrixXd::Identity(n, n));
        t.right = Eigen::MatrixXd::Identity(n, n);
        return t;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ref);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("reference matrix is not positive definite");
    t.S = es.operatorSqrt();
    t.S_inv = es.operatorInverseSqrt();
    t.left = t.S_inv;
    t.right = t.S_inv;
    t.condition = std::sqrt(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
    return t;
}

// vec(L X R) = (R^T (x) L) vec X plus vec(Id)
Network transform_net(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R, bool add_identity)
{
    const int n = static_cast<int>(L.rows());
    const bool right_is_id = R.isIdentity(0.0);
    std::vector<Triplet> t;
    for (int b = 0; b < n; ++b)        // column of output
        for (int a = 0; a < n; ++a)    // row of output
            for (int jj = 0; jj < n; ++jj) {
                if (right_is_id && jj != b)
                    continue;
                const double r = R(jj, b);
                if (r == 0.0)
                    continue;
                for (int ii = 0; ii < n; ++ii) {
                    const double v = L(a, ii) * r;
                    if (v != 0.0)
                        t.push_back({a + n * b, ii + n * jj, v});
                }
            }
    std::vector<double> bias(static_cast<std::size_t>(n * n), 0.0);
    if (add_identity)
        for (int i = 0; i < n; ++i)
            bias[static_cast<std::size_t>(i + n * i)] = 1.0;
    return nn::affine_net(nn::make_sparse(n * n, n * n, t), std::move(bias));
}

Network preconditioned(const PeriodicBasis& basis, const QuadratureRule& quad, double alpha,
                       const Transform& t)
{
    return nn::sparse_concat(transform_net(t.left, t.right, true), input_layer_net(basis, quad, alpha));
}

} // namespace

Network input_layer_net(const PeriodicBasis& basis, const QuadratureRule& quad, double alpha)
{
    require_quad(basis, quad);
    const spectral::BasisTables tab = spectral::tabulate(basis, quad);
    const int n = basis.size();
    const int nq = quad.size();
    const int d = basis.d();
    std::vector<Triplet> t;
    if (!basis.with_constant()) {
        t.reserve(static_cast<std::size_t>(n) * n * nq);
        for (int k = 0; k < nq; ++k) {
            const double w = -alpha * quad.weights(k);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (int m = 0; m < d; ++m)
                        s += tab.grads[static_cast<std::size_t>(m)](k, i) *
                             tab.grads[static_cast<std::size_t>(m)](k, j);
                    if (s != 0.0)
                        t.push_back({i + n * j, k, w * s});
                }
        }
        return nn::affine_net(nn::make_sparse(n * n, nq, t),
                              std::vector<double>(static_cast<std::size_t>(n * n), 0.0));
    }
    // input (k, m, n) -> k d^2 + m + d n carries A_mn(x_k); c(x_k) at nq d^2 + k
    const int dd = d * d;
    for (int k = 0; k < nq; ++k) {
        const double w = -alpha * quad.weights(k);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                for (int nn_ = 0; nn_ < d; ++nn_)
                    for (int m = 0; m < d; ++m) {
                        const double s = tab.grads[static_cast<std::size_t>(m)](k, i) *
                                         tab.grads[static_cast<std::size_t>(nn_)](k, j);
                        if (s != 0.0)
                            t.push_back({i + n * j, k * dd + m + d * nn_, w * s});
                    }
                const double mass = tab.values(k, i) * tab.values(k, j);
                if (mass != 0.0)
                    t.push_back({i + n * j, nq * dd + k, w * mass});
            }
    }
    return nn::affine_net(nn::make_sparse(n * n, nq * (dd + 1), t),
                          std::vector<double>(static_cast<std::size_t>(n * n), 0.0));
}

Network preconditioned_input_net(const PeriodicBasis& basis, const QuadratureRule& quad, double alpha,
                                 Preconditioning mode)
{
    require_quad(basis, quad);
    return preconditioned(basis, quad, alpha, preconditioner(basis, quad, mode));
}

Network branch_inversion_net(const PeriodicBasis& basis, const QuadratureRule& quad, double eps_inv,
                             const ClassBounds& bounds, BranchInfo* info_out, Preconditioning mode)
{
    require_quad(basis, quad);
    if (!(eps_inv > 0.0 && eps_inv < 1.0))
        throw PreconditionError("branch_inversion_net: eps_inv must lie in (0,1), got " +
                                std::to_string(eps_inv));
    if (!(bounds.coercivity > 0.0 && bounds.continuity >= bounds.coercivity))
        throw PreconditionError("branch_inversion_net: invalid coefficient bounds");
    const Transform t = preconditioner(basis, quad, mode);
    BranchInfo info;
    info.mode = mode;
    info.alpha = bounds.alpha();
    info.delta = bounds.delta();
    info.eps_inv = eps_inv;
    info.transform_condition = t.condition;
    // out = alpha T(X), X ~ (alpha B)^{-1}; ||T|| <= cond(S) in symmetric mode
    info.inner_epsilon = std::min(eps_inv / (info.alpha * t.condition), 0.24);
    const int n = basis.size();
    Network inv = nn::inversion_net(n, {info.inner_epsilon, 1.0, info.delta}, &info.inversion);
    Network core = nn::sparse_concat(std::move(inv), preconditioned(basis, quad, info.alpha, t));
    inv = Network(1, {nn::Layer{nn::SparseMatrix(1, 1), {0.0}}});
    if (info_out)
        *info_out = info;
    if (mode == Preconditioning::left) {
        Eigen::MatrixXd scale = info.alpha * Eigen::MatrixXd::Identity(n * n, n * n);
        return nn::concat(nn::affine_net(scale, Eigen::VectorXd::Zero(n * n)), std::move(core));
    }
    // (A~)^{-1} = S^{-1} (S^{-1} A S^{-1})^{-1} S
    return nn::sparse_concat(transform_net(info.alpha * t.S_inv, t.S, false), std::move(core));
}

Network branch_coeff_net(const PeriodicBasis& basis, const QuadratureRule& quad, const Eigen::VectorXd& c_f,
                         double eps_u, const ClassBounds& bounds, BranchInfo* info_out, Preconditioning mode)
{
    if (!(eps_u > 0.0 && eps_u < 1.0))
        throw PreconditionError("branch_coeff_net: eps_u must lie in (0,1), got " + std::to_string(eps_u));
    const int n = basis.size();
    if (c_f.size() != n)
        throw ShapeError("branch_coeff_net: load vector length differs from basis size");
    const Eigen::VectorXd ct = spectral::spd_solve(spectral::reference_matrix(basis, quad), c_f);
    const double norm = ct.norm();
    const double eps_inv = norm > 0.0 ? std::min(eps_u / norm, 0.5) : 0.5;
    BranchInfo info;
    Network inv = branch_inversion_net(basis, quad, eps_inv, bounds, &info, mode);
    info.rhs_norm = norm;
    info.eps_u = eps_u;
    if (info_out)
        *info_out = info;
    // c_u,i = sum_j X_ij ct_j  ->  (ct^T (x) Id) vec X
    std::vector<Triplet> t;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (ct(j) != 0.0)
                t.push_back({i, i + n * j, ct(j)});
    return nn::concat(nn::affine_net(nn::make_sparse(n, n * n, t), std::vector<double>(static_cast<std::size_t>(n), 0.0)),
                      std::move(inv));
}

Network branch_coeff_net(const PeriodicBasis& basis, const QuadratureRule& quad, const spectral::Expr& f,
                         double eps_u, const ClassBounds& bounds, BranchInfo* info, Preconditioning mode)
{
    return branch_coeff_net(basis, quad, spectral::load_vector(basis, f, quad.q + 4), eps_u, bounds, info, mode);
}

} // namespace pdeonet::onet
