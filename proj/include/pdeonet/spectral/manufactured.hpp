#pragma once

#include "pdeonet/spectral/coefficient.hpp"
#include "pdeonet/spectral/expr.hpp"

namespace pdeonet::spectral {

// f = -div(a grad u), or -sum_mn d_m(A_mn d_n u) + c u for the reaction-diffusion
// kind. Rejects u that is not periodic on [0,1]^d; for pure diffusion also checks
// that f has zero mean.
Expr manufactured_source(const Expr& u, const CoefficientField& coef);

} // namespace pdeonet::spectral
