#pragma once

#include "pdeonet/spectral/expr.hpp"
#include "pdeonet/spectral/quadrature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace pdeonet::spectral {

enum class CoefficientKind { scalar, reaction_diffusion };

// Diffusion coefficient a(x), or a symmetric matrix A(x) plus a reaction c(x).
// The bounds are declared by the caller and checked only by sampling.
struct CoefficientField {
    CoefficientKind kind = CoefficientKind::scalar;
    int d = 1;
    Expr a;                  // scalar kind
    std::vector<Expr> A;     // reaction-diffusion kind, d*d entries, column-major
    Expr c;                  // reaction-diffusion kind
    double a_min = 1.0;
    double a_max = 1.0;
    double c_min = 0.0;
    double c_max = 0.0;
    double analyticity = 0.0; // metadata only

    static CoefficientField scalar(int d, Expr a, double a_min, double a_max);
    static CoefficientField reaction_diffusion(int d, std::vector<Expr> A, Expr c, double a_min,
                                               double a_max, double c_min, double c_max);

    double value(std::span<const double> x) const;
    void matrix(std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const;
    double reaction(std::span<const double> x) const;

    // coercivity / continuity constants of the bilinear form
    double coercivity() const;
    double continuity() const;

    // Checks the declared bounds on the grid plus `random_points` uniform
    // points; throws PreconditionError on violation.
    void validate(const QuadratureRule& grid, int random_points = 1000, std::uint64_t seed = 7) const;
};

} // namespace pdeonet::spectral
