#pragma once

#include "pdeonet/nn/network.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pdeonet::nn {

struct ApproxSpec {
    double epsilon = 1e-3;
    double bound = 1.0;  // inputs lie in [-bound, bound]
    double delta = 0.5;  // inversion margin, ||A||_2 <= 1 - delta
};

// Number of hat-function compositions used by product_net for (eps, bound).
int sawtooth_steps(double epsilon, double bound);

// Approximates (x, y) -> x y on [-M, M]^2 through
// xy = (sq(x+y) - sq(x-y)) / 4 with a sawtooth square approximant.
// The output is exactly 0 whenever x = 0 or y = 0.
Network product_net(const ApproxSpec& spec);

// Input (vec B, vec C), B n x m and C m x l column-major; output vec(BC) with
// entrywise error <= epsilon when all entries lie in [-bound, bound].
Network matmul_net(int n, int m, int l, const ApproxSpec& spec);

// ceil(log(0.5 eps delta) / log(1 - delta)), at least 1.
int m_terms(double epsilon, double delta);

struct InversionInfo {
    int m = 1;               // Neumann terms needed
    int squarings = 0;       // K, so 2^K >= m terms are summed
    double entry_epsilon = 0.0;  // per-entry accuracy of every matrix product
    double product_bound = 0.0;
    int sawtooth_steps = 0;
    double predicted_error = 0.0; // spectral-norm bound of the emulation error
    bool epsilon_warning = false; // epsilon >= 1/4, outside the theorem's range
};

InversionInfo inversion_plan(int N, const ApproxSpec& spec);

// Input vec(A), A in R^{N x N} with ||A||_2 <= 1 - delta; output approximates
// vec((Id - A)^{-1}) by the partial Neumann sum P_K = sum_{j < 2^K} A^j built
// from repeated squaring.
Network inversion_net(int N, const ApproxSpec& spec, InversionInfo* info = nullptr);

// Exact Jacobian of the realization (ReLU'(0) = 0), output_dim x input_dim.
Eigen::MatrixXd net_gradient(const Network& net, std::span<const double> x);
// Realization together with its Jacobian.
std::vector<double> realize_with_jacobian(const Network& net, std::span<const double> x,
                                          Eigen::MatrixXd& jacobian);

struct PolyBasisInfo {
    double internal_epsilon = 0.0;
    int escalations = 0;
    double h1_error = 0.0;   // max over outputs of the measured H1 error
};

// d inputs, p^d - 1 outputs approximating the periodic Legendre basis
// phi_1..phi_{n_b} in H1(Q) to accuracy eps_b.
Network poly_basis_net(int p, int d, double eps_b, PolyBasisInfo* info = nullptr);

// Max H1 error of the net's outputs against phi_1..phi_{n_b}.
double poly_basis_h1_error(const Network& net, int p, int d);

struct AnalyticInfo {
    int degree = 0;
    double interpolation_error = 0.0;
    double network_error = 0.0;
    double internal_epsilon = 0.0;
};

using BoxFunction = std::function<double(std::span<const double>)>;

// Network approximating the given functions on the box (one output each) in
// the sup norm, checked on 10^4 sample points.
Network analytic_approx_net(const std::vector<BoxFunction>& funcs,
                            const std::vector<std::pair<double, double>>& box, double eps,
                            AnalyticInfo* info = nullptr);

} // namespace pdeonet::nn
