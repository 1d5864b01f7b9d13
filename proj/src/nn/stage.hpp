#pragma once

// Building blocks shared by the constructive approximations: a stage runs
// identity passes and product nets side by side and ends in an affine map.

#include "pdeonet/nn/network.hpp"

#include <utility>
#include <vector>

namespace pdeonet::nn::detail {

struct LinearForm {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    static LinearForm var(int i, double c = 1.0) { return {{{i, c}}, 0.0}; }
    static LinearForm value(double c) { return {{}, c}; }
    LinearForm& add(int i, double c)
    {
        terms.emplace_back(i, c);
        return *this;
    }
};

class StageBuilder {
public:
    explicit StageBuilder(int input_dim) : input_dim_(input_dim) {}

    // item carrying the exact value of f
    int pass(LinearForm f);
    // item carrying an approximation of a*b, |a|,|b| <= bound
    int product(LinearForm a, LinearForm b, double bound);
    // output = form over items (+ constant)
    void output(LinearForm over_items) { outputs_.push_back(std::move(over_items)); }

    int items() const { return static_cast<int>(kinds_.size()); }
    Network build(double eps) const;

private:
    struct Product {
        LinearForm a, b;
        double bound;
    };
    int input_dim_;
    std::vector<int> kinds_;      // -1 pass, otherwise index into products_
    std::vector<int> slot_;       // position among passes
    std::vector<LinearForm> passes_;
    std::vector<Product> products_;
    std::vector<LinearForm> outputs_;
};

// Single-layer network with the given rows over input_dim inputs.
Network forms_net(int input_dim, const std::vector<LinearForm>& rows);

// One scalar input x, s = scale x + shift, P_0 = 1, P_1 = s,
// P_{k+1} = alpha_k s P_k + beta_k P_{k-1}; outputs P_1..P_n.
struct ThreeTerm {
    double scale, shift;
    std::vector<double> alpha, beta; // indexed by k = 1..n-1 (slot 0 unused)
    double bound;                    // bound on |s| and |P_k|
};
Network recurrence_net(const ThreeTerm& rec, int n, double eps);

// Products of up to three factors. term_factors[t] lists the factor forms of
// term t over the network inputs (empty = constant 1); |factor| <= factor_bound.
// outputs[r] is a form over term indices.
Network tensor_net(int input_dim, const std::vector<std::vector<LinearForm>>& term_factors,
                   double factor_bound, const std::vector<LinearForm>& outputs, double eps);

} // namespace pdeonet::nn::detail
