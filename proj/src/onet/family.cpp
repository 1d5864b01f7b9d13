#include "pdeonet/onet/family.hpp"

#include <cmath>
#include <numbers>

namespace pdeonet::onet {

using spectral::CoefficientField;
using spectral::Expr;

namespace {

Expr trig_sum(int d, std::mt19937_64& rng, double amplitude, int max_frequency, int modes, double strip)
{
    std::uniform_int_distribution<int> freq(-max_frequency, max_frequency);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> total(0.5, 1.0);
    struct Mode {
        std::vector<int> k;
        double c, weight;
        bool use_sin;
    };
    std::vector<Mode> ms;
    double s = 0.0;
    for (int j = 0; j < modes; ++j) {
        Mode m;
        double norm2 = 0.0;
        for (int a = 0; a < d; ++a) {
            m.k.push_back(freq(rng));
            norm2 += m.k.back() * m.k.back();
        }
        if (norm2 == 0.0) {
            m.k[0] = 1;
            norm2 = 1.0;
        }
        // cosh(2 pi |k| tau) / cosh(2 pi tau): keeps a(x) zero-free in |Im x| < tau
        m.weight = std::cosh(2.0 * std::numbers::pi * std::sqrt(norm2) * strip) /
                   std::cosh(2.0 * std::numbers::pi * strip);
        m.c = unit(rng);
        m.use_sin = unit(rng) > 0.0;
        s += std::abs(m.c) * m.weight;
        ms.push_back(std::move(m));
    }
    const double scale = amplitude * total(rng) / s;
    Expr sum(0.0);
    for (const auto& m : ms) {
        Expr phase(0.0);
        for (int a = 0; a < d; ++a)
            if (m.k[static_cast<std::size_t>(a)] != 0)
                phase = phase + Expr(2.0 * std::numbers::pi * m.k[static_cast<std::size_t>(a)]) * Expr::x(a);
        sum = sum + Expr(m.c * scale) * (m.use_sin ? sin(phase) : cos(phase));
    }
    return sum;
}

} // namespace

CoefficientField random_trig_coefficient(int d, std::mt19937_64& rng, double amplitude, int max_frequency,
                                         int modes, double strip)
{
    return CoefficientField::scalar(d, Expr(1.0) + trig_sum(d, rng, amplitude, max_frequency, modes, strip),
                                    1.0 - amplitude, 1.0 + amplitude);
}

CoefficientField random_rd_coefficient(int d, std::mt19937_64& rng, double amplitude, double c_amplitude)
{
    const Expr a = Expr(1.0) + trig_sum(d, rng, amplitude, 2, 4, 0.15);
    std::vector<Expr> A(static_cast<std::size_t>(d * d), Expr(0.0));
    for (int m = 0; m < d; ++m)
        A[static_cast<std::size_t>(m + d * m)] = a;
    const Expr c = Expr(1.0) + trig_sum(d, rng, c_amplitude, 2, 3, 0.15);
    return CoefficientField::reaction_diffusion(d, std::move(A), c, 1.0 - amplitude, 1.0 + amplitude,
                                                1.0 - c_amplitude, 1.0 + c_amplitude);
}

} // namespace pdeonet::onet
