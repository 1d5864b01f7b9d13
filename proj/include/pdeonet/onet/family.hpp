#pragma once

#include "pdeonet/spectral/coefficient.hpp"
#include "pdeonet/spectral/expr.hpp"

#include <random>

namespace pdeonet::onet {

// a = 1 + sum_k c_k trig(2 pi k.x) with sum |c_k| cosh(2 pi |k| strip) / cosh(2 pi strip)
// <= amplitude. The bounds [1 - amplitude, 1 + amplitude] hold by construction and
// all draws share a strip of analyticity, so Galerkin rates are uniform.
spectral::CoefficientField random_trig_coefficient(int d, std::mt19937_64& rng, double amplitude = 0.5,
                                                   int max_frequency = 2, int modes = 4, double strip = 0.15);

// reaction-diffusion draw: A = a(x) Id with a as above, c = 1 + trig with |.| <= c_amplitude
spectral::CoefficientField random_rd_coefficient(int d, std::mt19937_64& rng, double amplitude = 0.5,
                                                 double c_amplitude = 0.25);

} // namespace pdeonet::onet
