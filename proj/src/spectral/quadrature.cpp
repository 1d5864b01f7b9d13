#include "pdeonet/spectral/quadrature.hpp"

#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/legendre.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pdeonet::spectral {

namespace {

constexpr double newton_tol = 1e-14;
constexpr int newton_max_iter = 100;

} // namespace

Rule1d gauss_lobatto_1d(int q)
{
    if (q < 2)
        throw PreconditionError("Gauss-Lobatto rule needs q >= 2");
    const int n = q - 1;
    Eigen::VectorXd t(q);
    t(0) = -1.0;
    t(q - 1) = 1.0;
    // interior nodes: roots of P'_n, Newton from Chebyshev-Lobatto points
    for (int k = 1; k < q - 1; ++k) {
        double x = -std::cos(std::numbers::pi * k / n);
        bool converged = false;
        for (int it = 0; it < newton_max_iter; ++it) {
            const auto pn = legendre(n, x);
            // (1 - x^2) P''_n = 2x P'_n - n(n+1) P_n
            const double d2 = (2.0 * x * pn.deriv - n * (n + 1.0) * pn.value) / (1.0 - x * x);
            const double step = pn.deriv / d2;
            x -= step;
            if (std::abs(step) < newton_tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NumericError("Gauss-Lobatto Newton iteration did not converge for q=" + std::to_string(q));
        t(k) = x;
    }
    Rule1d r{Eigen::VectorXd(q), Eigen::VectorXd(q)};
    for (int k = 0; k < q; ++k) {
        const double pn = legendre(n, t(k)).value;
        r.nodes(k) = 0.5 * (t(k) + 1.0);
        r.weights(k) = 1.0 / (q * (q - 1.0) * pn * pn); // 2/(q(q-1)P^2), halved for [0,1]
    }
    r.nodes(0) = 0.0;
    r.nodes(q - 1) = 1.0;
    return r;
}

Rule1d gauss_legendre_1d(int n)
{
    if (n < 1)
        throw PreconditionError("Gauss-Legendre rule needs n >= 1");
    Rule1d r{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int k = 0; k < n; ++k) {
        double x = -std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        bool converged = false;
        ValueDeriv pn{};
        for (int it = 0; it < newton_max_iter; ++it) {
            pn = legendre(n, x);
            const double step = pn.value / pn.deriv;
            x -= step;
            if (std::abs(step) < newton_tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NumericError("Gauss-Legendre Newton iteration did not converge for n=" + std::to_string(n));
        pn = legendre(n, x);
        r.nodes(k) = 0.5 * (x + 1.0);
        r.weights(k) = 1.0 / ((1.0 - x * x) * pn.deriv * pn.deriv);
    }
    return r;
}

Rule1d composite_gauss_1d(int cells, int n)
{
    if (cells < 1)
        throw PreconditionError("composite rule needs at least one cell");
    const Rule1d base = gauss_legendre_1d(n);
    Rule1d r{Eigen::VectorXd(cells * n), Eigen::VectorXd(cells * n)};
    const double h = 1.0 / cells;
    for (int c = 0; c < cells; ++c)
        for (int k = 0; k < n; ++k) {
            r.nodes(c * n + k) = (c + base.nodes(k)) * h;
            r.weights(c * n + k) = base.weights(k) * h;
        }
    return r;
}

QuadratureRule tensorize(const Rule1d& rule, int d)
{
    if (d < 1)
        throw PreconditionError("quadrature dimension must be positive");
    const int m = static_cast<int>(rule.nodes.size());
    int n = 1;
    for (int k = 0; k < d; ++k)
        n *= m;
    QuadratureRule out;
    out.q = m;
    out.d = d;
    out.nodes.resize(d, n);
    out.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        int rem = i;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            const int j = rem % m;
            rem /= m;
            out.nodes(k, i) = rule.nodes(j);
            w *= rule.weights(j);
        }
        out.weights(i) = w;
    }
    return out;
}

QuadratureRule gauss_lobatto(int q, int d) { return tensorize(gauss_lobatto_1d(q), d); }
QuadratureRule gauss_legendre(int n, int d) { return tensorize(gauss_legendre_1d(n), d); }
QuadratureRule composite_gauss(int cells, int n, int d) { return tensorize(composite_gauss_1d(cells, n), d); }

} // namespace pdeonet::spectral
