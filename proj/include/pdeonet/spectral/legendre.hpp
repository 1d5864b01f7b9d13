#pragma once

#include <span>

namespace pdeonet::spectral {

struct ValueDeriv {
    double value;
    double deriv;
};

// Legendre P_n on [-1,1] with derivative.
ValueDeriv legendre(int n, double t);

// Shifted Legendre L_i(x) = P_i(2x-1) on [0,1], L_i(1) = 1.
ValueDeriv shifted_legendre(int i, double x);

// L_0..L_n at x into value[0..n], deriv[0..n].
void shifted_legendre_all(int n, double x, std::span<double> value, std::span<double> deriv);

} // namespace pdeonet::spectral
