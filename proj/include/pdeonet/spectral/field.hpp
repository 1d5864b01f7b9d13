#pragma once

#include "pdeonet/spectral/basis.hpp"
#include "pdeonet/spectral/expr.hpp"
#include "pdeonet/spectral/quadrature.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pdeonet::spectral {

// Scalar function on Q with gradient.
class Field {
public:
    virtual ~Field() = default;
    virtual int dim() const = 0;
    // value at x; gradient written to grad when non-empty
    virtual double eval(std::span<const double> x, std::span<double> grad) const = 0;
    double operator()(std::span<const double> x) const { return eval(x, {}); }
};

class ExprField : public Field {
public:
    ExprField(int d, Expr f);
    int dim() const override { return d_; }
    double eval(std::span<const double> x, std::span<double> grad) const override;
    const Expr& expr() const { return f_; }

private:
    int d_;
    Expr f_;
    std::vector<Expr> grad_;
};

class ZeroField : public Field {
public:
    explicit ZeroField(int d) : d_(d) {}
    int dim() const override { return d_; }
    double eval(std::span<const double>, std::span<double> grad) const override;

private:
    int d_;
};

// u = sum_i w_i phi_i
class SolutionField : public Field {
public:
    SolutionField(PeriodicBasis basis, Eigen::VectorXd coefficients);
    int dim() const override { return basis_.d(); }
    double eval(std::span<const double> x, std::span<double> grad) const override;
    const PeriodicBasis& basis() const { return basis_; }
    const Eigen::VectorXd& coefficients() const { return w_; }

private:
    PeriodicBasis basis_;
    Eigen::VectorXd w_;
};

struct ErrorNorms {
    double l2;
    double h1;
};

// ||u - v|| in L2 and H1 by the given rule.
ErrorNorms error_norms(const Field& u, const Field& v, const QuadratureRule& rule);
// Gauss-Legendre with max(2p+6, 40) points per axis (fewer in 3-D).
ErrorNorms error_norms(const Field& u, const SolutionField& v);
// Composite rule for piecewise-linear (network-backed) fields.
QuadratureRule network_error_rule(int d);

} // namespace pdeonet::spectral
