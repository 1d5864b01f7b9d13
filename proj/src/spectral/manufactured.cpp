#include "pdeonet/spectral/manufactured.hpp"

#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/quadrature.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pdeonet::spectral {

namespace {

void check_periodic(const Expr& u, int d)
{
    const Rule1d probe = gauss_legendre_1d(5);
    std::vector<Expr> du;
    for (int m = 0; m < d; ++m)
        du.push_back(u.dx(m));
    std::vector<double> x0(static_cast<std::size_t>(d)), x1(x0.size());
    const int combos = d == 1 ? 1 : (d == 2 ? 5 : 25);
    for (int axis = 0; axis < d; ++axis) {
        for (int c = 0; c < combos; ++c) {
            int rem = c;
            for (int k = 0; k < d; ++k) {
                if (k == axis)
                    continue;
                x0[static_cast<std::size_t>(k)] = probe.nodes(rem % 5);
                rem /= 5;
            }
            x1 = x0;
            x0[static_cast<std::size_t>(axis)] = 0.0;
            x1[static_cast<std::size_t>(axis)] = 1.0;
            double gap = std::abs(u.eval(x0) - u.eval(x1));
            for (int m = 0; m < d; ++m)
                gap = std::max(gap, std::abs(du[static_cast<std::size_t>(m)].eval(x0) -
                                             du[static_cast<std::size_t>(m)].eval(x1)));
            if (gap > 1e-12)
                throw PreconditionError("manufactured solution is not periodic along x" +
                                        std::to_string(axis + 1) + " (mismatch " + std::to_string(gap) + ")");
        }
    }
}

} // namespace

Expr manufactured_source(const Expr& u, const CoefficientField& coef)
{
    const int d = coef.d;
    if (u.max_x() > d)
        throw ShapeError("manufactured solution uses coordinates beyond the dimension");
    check_periodic(u, d);
    Expr f(0.0);
    if (coef.kind == CoefficientKind::scalar) {
        for (int m = 0; m < d; ++m)
            f = f - (coef.a * u.dx(m)).dx(m);
        const QuadratureRule rule = gauss_legendre(d == 3 ? 16 : 40, d);
        double mean = 0.0, scale = 1.0;
        for (int k = 0; k < rule.size(); ++k) {
            const double v = f.eval(rule.node(k));
            mean += rule.weights(k) * v;
            scale = std::max(scale, std::abs(v));
        }
        if (std::abs(mean) > 1e-12 * scale)
            throw PreconditionError("manufactured source has nonzero mean " + std::to_string(mean));
        return f;
    }
    for (int m = 0; m < d; ++m) {
        Expr flux(0.0);
        for (int n = 0; n < d; ++n)
            flux = flux + coef.A[static_cast<std::size_t>(m + d * n)] * u.dx(n);
        f = f - flux.dx(m);
    }
    return f + coef.c * u;
}

} // namespace pdeonet::spectral
