#include "pdeonet/spectral/coefficient.hpp"

#include "pdeonet/nn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>
#include <string>

namespace pdeonet::spectral {

CoefficientField CoefficientField::scalar(int d, Expr a, double a_min, double a_max)
{
    if (!(a_min > 0.0) || a_max < a_min)
        throw PreconditionError("coefficient bounds need 0 < a_min <= a_max");
    CoefficientField f;
    f.kind = CoefficientKind::scalar;
    f.d = d;
    f.a = std::move(a);
    f.a_min = a_min;
    f.a_max = a_max;
    return f;
}

CoefficientField CoefficientField::reaction_diffusion(int d, std::vector<Expr> A, Expr c, double a_min,
                                                      double a_max, double c_min, double c_max)
{
    if (static_cast<int>(A.size()) != d * d)
        throw ShapeError("diffusion matrix needs d*d entries");
    if (!(a_min > 0.0) || a_max < a_min || !(c_min > 0.0) || c_max < c_min)
        throw PreconditionError("reaction-diffusion bounds need positive minima");
    CoefficientField f;
    f.kind = CoefficientKind::reaction_diffusion;
    f.d = d;
    f.A = std::move(A);
    f.c = std::move(c);
    f.a_min = a_min;
    f.a_max = a_max;
    f.c_min = c_min;
    f.c_max = c_max;
    return f;
}

double CoefficientField::value(std::span<const double> x) const
{
    if (kind != CoefficientKind::scalar)
        throw PreconditionError("scalar value requested from a matrix coefficient");
    return a.eval(x);
}

void CoefficientField::matrix(std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const
{
    if (kind == CoefficientKind::scalar) {
        out.setZero();
        out.diagonal().setConstant(a.eval(x));
        return;
    }
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m)
            out(m, n) = A[static_cast<std::size_t>(m + d * n)].eval(x);
}

double CoefficientField::reaction(std::span<const double> x) const
{
    return kind == CoefficientKind::scalar ? 0.0 : c.eval(x);
}

double CoefficientField::coercivity() const
{
    return kind == CoefficientKind::scalar ? a_min : std::min(a_min, c_min);
}

double CoefficientField::continuity() const
{
    return kind == CoefficientKind::scalar ? a_max : std::max(a_max, c_max);
}

void CoefficientField::validate(const QuadratureRule& grid, int random_points, std::uint64_t seed) const
{
    if (grid.d != d)
        throw ShapeError("validation grid dimension differs from coefficient dimension");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(d));
    Eigen::MatrixXd M(d, d);
    const double tol = 1e-12 * std::max(1.0, a_max);
    auto check = [&](std::span<const double> pt) {
        if (kind == CoefficientKind::scalar) {
            const double v = a.eval(pt);
            if (v < a_min - tol || v > a_max + tol)
                throw PreconditionError("coefficient value " + std::to_string(v) + " outside [" +
                                        std::to_string(a_min) + ", " + std::to_string(a_max) + "]");
            return;
        }
        matrix(pt, M);
        if ((M - M.transpose()).norm() > 1e-12)
            throw PreconditionError("diffusion matrix is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < a_min - tol || es.eigenvalues().maxCoeff() > a_max + tol)
            throw PreconditionError("diffusion matrix eigenvalues outside declared bounds");
        const double cv = c.eval(pt);
        if (cv < c_min - tol || cv > c_max + tol)
            throw PreconditionError("reaction value outside declared bounds");
    };
    for (int k = 0; k < grid.size(); ++k)
        check(grid.node(k));
    for (int r = 0; r < random_points; ++r) {
        for (auto& v : x)
            v = unif(rng);
        check(x);
    }
}

} // namespace pdeonet::spectral
