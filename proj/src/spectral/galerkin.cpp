#include "pdeonet/spectral/galerkin.hpp"

#include "pdeonet/nn/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace pdeonet::spectral {

BasisTables tabulate(const PeriodicBasis& basis, const QuadratureRule& rule)
{
    if (rule.d != basis.d())
        throw ShapeError("quadrature dimension differs from basis dimension");
    const int n = rule.size();
    const int nb = basis.size();
    BasisTables t;
    t.values.resize(n, nb);
    t.grads.assign(static_cast<std::size_t>(basis.d()), Eigen::MatrixXd(n, nb));
    Eigen::VectorXd v(nb);
    Eigen::MatrixXd g(basis.d(), nb);
    for (int k = 0; k < n; ++k) {
        basis.eval_all(rule.node(k), v, g);
        t.values.row(k) = v.transpose();
        for (int m = 0; m < basis.d(); ++m)
            t.grads[static_cast<std::size_t>(m)].row(k) = g.row(m);
    }
    return t;
}

namespace {

Eigen::MatrixXd stiffness_from_tables(const CoefficientField& coef, const BasisTables& t,
                                      const QuadratureRule& quad)
{
    const int d = quad.d;
    const int nb = static_cast<int>(t.values.cols());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb, nb);
    if (coef.kind == CoefficientKind::scalar) {
        Eigen::VectorXd wa(quad.size());
        for (int k = 0; k < quad.size(); ++k)
            wa(k) = quad.weights(k) * coef.value(quad.node(k));
        for (int m = 0; m < d; ++m) {
            const auto& G = t.grads[static_cast<std::size_t>(m)];
            A.noalias() += G.transpose() * wa.asDiagonal() * G;
        }
        return A;
    }
    // sum_{m,n} A_mn d_n phi_j d_m phi_i + c phi_i phi_j
    std::vector<Eigen::VectorXd> wA(static_cast<std::size_t>(d * d), Eigen::VectorXd(quad.size()));
    Eigen::VectorXd wc(quad.size());
    Eigen::MatrixXd M(d, d);
    for (int k = 0; k < quad.size(); ++k) {
        coef.matrix(quad.node(k), M);
        for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m)
                wA[static_cast<std::size_t>(m + d * n)](k) = quad.weights(k) * M(m, n);
        wc(k) = quad.weights(k) * coef.reaction(quad.node(k));
    }
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) {
            const auto& Gm = t.grads[static_cast<std::size_t>(m)];
            const auto& Gn = t.grads[static_cast<std::size_t>(n)];
            A.noalias() += Gm.transpose() * wA[static_cast<std::size_t>(m + d * n)].asDiagonal() * Gn;
        }
    A.noalias() += t.values.transpose() * wc.asDiagonal() * t.values;
    return 0.5 * (A + A.transpose());
}

void require_order(const PeriodicBasis& basis, const QuadratureRule& quad)
{
    if (quad.q < basis.p() + 1)
        throw PreconditionError("quadrature order q=" + std::to_string(quad.q) + " below p+1=" +
                                std::to_string(basis.p() + 1));
}

void require_kind(const CoefficientField& coef, const PeriodicBasis& basis)
{
    if (coef.d != basis.d())
        throw ShapeError("coefficient dimension differs from basis dimension");
    const bool rd = coef.kind == CoefficientKind::reaction_diffusion;
    if (rd != basis.with_constant())
        throw PreconditionError(rd ? "reaction-diffusion needs the basis with the constant mode"
                                   : "pure diffusion uses the zero-mean basis");
}

} // namespace

Eigen::MatrixXd stiffness_matrix(const CoefficientField& coef, const PeriodicBasis& basis,
                                 const QuadratureRule& quad)
{
    require_kind(coef, basis);
    return stiffness_from_tables(coef, tabulate(basis, quad), quad);
}

Eigen::MatrixXd reference_matrix(const PeriodicBasis& basis, const QuadratureRule& quad)
{
    const int d = basis.d();
    if (!basis.with_constant())
        return stiffness_matrix(CoefficientField::scalar(d, Expr(1.0), 1.0, 1.0), basis, quad);
    std::vector<Expr> id(static_cast<std::size_t>(d * d), Expr(0.0));
    for (int m = 0; m < d; ++m)
        id[static_cast<std::size_t>(m + d * m)] = Expr(1.0);
    return stiffness_matrix(CoefficientField::reaction_diffusion(d, id, Expr(1.0), 1.0, 1.0, 1.0, 1.0),
                            basis, quad);
}

Eigen::MatrixXd mass_matrix(const PeriodicBasis& basis, const QuadratureRule& quad)
{
    const BasisTables t = tabulate(basis, quad);
    return t.values.transpose() * quad.weights.asDiagonal() * t.values;
}

Eigen::VectorXd load_vector(const PeriodicBasis& basis, const Expr& f, int q_f)
{
    const QuadratureRule rule = gauss_lobatto(q_f, basis.d());
    const BasisTables t = tabulate(basis, rule);
    Eigen::VectorXd wf(rule.size());
    for (int k = 0; k < rule.size(); ++k)
        wf(k) = rule.weights(k) * f.eval(rule.node(k));
    return t.values.transpose() * wf;
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const double scale = A.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::VectorXd D = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || D.minCoeff() < 1e-12 * scale)
        throw AssemblyError("Galerkin matrix is numerically singular or indefinite (min pivot " +
                            std::to_string(D.minCoeff()) + ", norm " + std::to_string(scale) + ")");
    return ldlt.solve(B);
}

DiscreteSystem assemble(const CoefficientField& coef, const PeriodicBasis& basis,
                        const QuadratureRule& quad, const Expr& f)
{
    require_kind(coef, basis);
    require_order(basis, quad);
    if (coef.kind == CoefficientKind::scalar) {
        const QuadratureRule mean_rule = gauss_legendre(std::max(quad.q + 4, basis.d() == 3 ? 16 : 32), basis.d());
        double mean = 0.0, scale = 1.0;
        for (int k = 0; k < mean_rule.size(); ++k) {
            const double v = f.eval(mean_rule.node(k));
            mean += mean_rule.weights(k) * v;
            scale = std::max(scale, std::abs(v));
        }
        if (std::abs(mean) > 1e-10 * scale)
            throw PreconditionError("source term does not have zero mean (integral " +
                                    std::to_string(mean) + ")");
    }
    const BasisTables t = tabulate(basis, quad);
    DiscreteSystem s;
    s.stiffness = stiffness_from_tables(coef, t, quad);
    s.reference = reference_matrix(basis, quad);
    s.rhs = load_vector(basis, f, quad.q + 4);
    s.preconditioned = spd_solve(s.reference, s.stiffness);
    s.preconditioned_rhs = spd_solve(s.reference, s.rhs);
    s.solution = spd_solve(s.stiffness, s.rhs);
    return s;
}

SolutionField galerkin_solve(const CoefficientField& coef, const Expr& f, int p, int q)
{
    PeriodicBasis basis(coef.d, p, coef.kind == CoefficientKind::reaction_diffusion);
    const DiscreteSystem s = assemble(coef, basis, gauss_lobatto(q, coef.d), f);
    return SolutionField(basis, s.solution);
}

SpectrumBounds generalized_extremes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
    if (eb.info() != Eigen::Success || eb.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("reference matrix is not positive definite");
    const Eigen::MatrixXd R = eb.operatorInverseSqrt();
    const Eigen::MatrixXd C = R * A * R;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(0.5 * (C + C.transpose()), Eigen::EigenvaluesOnly);
    if (ec.info() != Eigen::Success)
        throw NumericError("symmetric eigensolver failed");
    return {ec.eigenvalues().minCoeff(), ec.eigenvalues().maxCoeff()};
}

SpectrumBounds spectrum_bounds(const DiscreteSystem& sys)
{
    return generalized_extremes(sys.stiffness, sys.reference);
}

} // namespace pdeonet::spectral
