#include "pdeonet/spectral/legendre.hpp"

#include "pdeonet/nn/errors.hpp"

#include <vector>

namespace pdeonet::spectral {

namespace {

// P_0..P_n and P'_0..P'_n at t; derivative via P'_{k+1} = P'_{k-1} + (2k+1) P_k,
// which stays accurate at the endpoints.
void legendre_table(int n, double t, std::span<double> p, std::span<double> dp)
{
    p[0] = 1.0;
    dp[0] = 0.0;
    if (n == 0)
        return;
    p[1] = t;
    dp[1] = 1.0;
    for (int k = 1; k < n; ++k) {
        const auto u = static_cast<std::size_t>(k);
        p[u + 1] = ((2.0 * k + 1.0) * t * p[u] - k * p[u - 1]) / (k + 1.0);
        dp[u + 1] = dp[u - 1] + (2.0 * k + 1.0) * p[u];
    }
}

} // namespace

ValueDeriv legendre(int n, double t)
{
    if (n < 0)
        throw PreconditionError("Legendre degree must be nonnegative");
    std::vector<double> p(static_cast<std::size_t>(n) + 1), dp(p.size());
    legendre_table(n, t, p, dp);
    return {p.back(), dp.back()};
}

ValueDeriv shifted_legendre(int i, double x)
{
    auto r = legendre(i, 2.0 * x - 1.0);
    return {r.value, 2.0 * r.deriv};
}

void shifted_legendre_all(int n, double x, std::span<double> value, std::span<double> deriv)
{
    if (n < 0)
        throw PreconditionError("Legendre degree must be nonnegative");
    if (value.size() < static_cast<std::size_t>(n) + 1 || deriv.size() < static_cast<std::size_t>(n) + 1)
        throw ShapeError("shifted_legendre_all: output buffers too short");
    legendre_table(n, 2.0 * x - 1.0, value, deriv);
    for (int k = 0; k <= n; ++k)
        deriv[static_cast<std::size_t>(k)] *= 2.0;
}

} // namespace pdeonet::spectral
