#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pdeonet::spectral {

// 1-D periodic member: phi_0 = 1, phi_j = L_{j+1} - [j even] L_1 for j >= 1.
double periodic_1d(int j, double x, double* deriv = nullptr);

// Tensor-product periodic Legendre basis {phi_i}, i = 1..n_b, n_b = p^d - 1.
// Flat index i = i_1 + p i_2 + ... + p^{d-1} i_d over {0..p-1}^d; i = 0 (the
// constant) is excluded. With `with_constant` the constant is appended as
// index n_b + 1.
class PeriodicBasis {
public:
    PeriodicBasis(int d, int p, bool with_constant = false);

    int d() const { return d_; }
    int p() const { return p_; }
    // number of zero-mean members, p^d - 1
    int n_b() const { return n_b_; }
    // members actually in use (n_b, or n_b + 1 with the constant)
    int size() const { return n_b_ + (with_constant_ ? 1 : 0); }
    bool with_constant() const { return with_constant_; }

    std::vector<int> multi_index(int i) const;
    int flat_index(std::span<const int> multi) const;

    // value of member i (1-based) and gradient into grad[0..d)
    double eval(int i, std::span<const double> x, std::span<double> grad = {}) const;

    // All members at x: values (size()) and gradients (d x size(), column-major
    // with member as column).
    void eval_all(std::span<const double> x, Eigen::Ref<Eigen::VectorXd> values,
                  Eigen::Ref<Eigen::MatrixXd> grads) const;

private:
    int d_, p_, n_b_;
    bool with_constant_;
};

} // namespace pdeonet::spectral
