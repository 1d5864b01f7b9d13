#include "pdeonet/spectral/field.hpp"

#include "pdeonet/nn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pdeonet::spectral {

ExprField::ExprField(int d, Expr f) : d_(d), f_(std::move(f))
{
    if (f_.max_x() > d)
        throw ShapeError("expression uses coordinates beyond the field dimension");
    for (int k = 0; k < d; ++k)
        grad_.push_back(f_.dx(k));
}

double ExprField::eval(std::span<const double> x, std::span<double> grad) const
{
    for (std::size_t k = 0; k < grad.size(); ++k)
        grad[k] = grad_[k].eval(x);
    return f_.eval(x);
}

double ZeroField::eval(std::span<const double>, std::span<double> grad) const
{
    std::fill(grad.begin(), grad.end(), 0.0);
    return 0.0;
}

SolutionField::SolutionField(PeriodicBasis basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), w_(std::move(coefficients))
{
    if (w_.size() != basis_.size())
        throw ShapeError("coefficient vector length differs from basis size");
}

double SolutionField::eval(std::span<const double> x, std::span<double> grad) const
{
    Eigen::VectorXd v(basis_.size());
    Eigen::MatrixXd g(basis_.d(), basis_.size());
    basis_.eval_all(x, v, g);
    if (!grad.empty()) {
        Eigen::VectorXd gw = g * w_;
        std::copy(gw.data(), gw.data() + gw.size(), grad.begin());
    }
    return v.dot(w_);
}

ErrorNorms error_norms(const Field& u, const Field& v, const QuadratureRule& rule)
{
    if (u.dim() != v.dim() || u.dim() != rule.d)
        throw ShapeError("error_norms: dimension mismatch");
    const auto d = static_cast<std::size_t>(rule.d);
    std::vector<double> gu(d), gv(d);
    double l2 = 0.0, semi = 0.0;
    for (int k = 0; k < rule.size(); ++k) {
        const auto x = rule.node(k);
        const double e = u.eval(x, gu) - v.eval(x, gv);
        double ge = 0.0;
        for (std::size_t m = 0; m < d; ++m)
            ge += (gu[m] - gv[m]) * (gu[m] - gv[m]);
        l2 += rule.weights(k) * e * e;
        semi += rule.weights(k) * ge;
    }
    return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ErrorNorms error_norms(const Field& u, const SolutionField& v)
{
    const int d = v.dim();
    int n = std::max(2 * v.basis().p() + 6, 40);
    if (d == 3)
        n = std::max(2 * v.basis().p() + 6, 20);
    return error_norms(u, v, gauss_legendre(n, d));
}

QuadratureRule network_error_rule(int d)
{
    // 4 Gauss points per cell (no midpoint node), so every node is irrational
    // and never sits on a ReLU breakpoint: those lie at dyadic points and at
    // t = 0, where the one-sided Jacobian convention would be sampled.
    const int cells = d == 1 ? 48 : (d == 2 ? 24 : 10);
    return composite_gauss(cells, 4, d);
}

} // namespace pdeonet::spectral
