#include "pdeonet/spectral/basis.hpp"

#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/legendre.hpp"

#include <string>

namespace pdeonet::spectral {

double periodic_1d(int j, double x, double* deriv)
{
    if (j < 0)
        throw PreconditionError("periodic_1d: negative index");
    auto l = shifted_legendre(j + (j == 0 ? 0 : 1), x);
    if (j > 0 && j % 2 == 0) {
        l.value -= 2.0 * x - 1.0;
        l.deriv -= 2.0;
    }
    if (deriv)
        *deriv = l.deriv;
    return l.value;
}

PeriodicBasis::PeriodicBasis(int d, int p, bool with_constant)
    : d_(d), p_(p), n_b_(0), with_constant_(with_constant)
{
    if (d < 1 || d > 3)
        throw PreconditionError("basis dimension must be 1, 2 or 3");
    if (p < 2)
        throw PreconditionError("polynomial order p must be >= 2");
    int total = 1;
    for (int k = 0; k < d; ++k)
        total *= p;
    n_b_ = total - 1;
}

std::vector<int> PeriodicBasis::multi_index(int i) const
{
    if (i < 1 || i > size())
        throw ShapeError("basis index " + std::to_string(i) + " outside 1.." + std::to_string(size()));
    std::vector<int> m(static_cast<std::size_t>(d_), 0);
    if (i == n_b_ + 1)
        return m;
    for (int k = 0; k < d_; ++k) {
        m[static_cast<std::size_t>(k)] = i % p_;
        i /= p_;
    }
    return m;
}

int PeriodicBasis::flat_index(std::span<const int> multi) const
{
    if (static_cast<int>(multi.size()) != d_)
        throw ShapeError("multi-index length differs from dimension");
    int i = 0;
    int stride = 1;
    for (int k = 0; k < d_; ++k) {
        const int m = multi[static_cast<std::size_t>(k)];
        if (m < 0 || m >= p_)
            throw ShapeError("multi-index entry out of range");
        i += m * stride;
        stride *= p_;
    }
    if (i == 0)
        return with_constant_ ? n_b_ + 1 : throw ShapeError("constant mode is not a basis member");
    return i;
}

double PeriodicBasis::eval(int i, std::span<const double> x, std::span<double> grad) const
{
    if (static_cast<int>(x.size()) != d_)
        throw ShapeError("point dimension differs from basis dimension");
    const auto m = multi_index(i);
    double vals[3], ders[3];
    for (int k = 0; k < d_; ++k)
        vals[k] = periodic_1d(m[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(k)], &ders[k]);
    double value = 1.0;
    for (int k = 0; k < d_; ++k)
        value *= vals[k];
    if (!grad.empty()) {
        for (int a = 0; a < d_; ++a) {
            double g = ders[a];
            for (int k = 0; k < d_; ++k)
                if (k != a)
                    g *= vals[k];
            grad[static_cast<std::size_t>(a)] = g;
        }
    }
    return value;
}

void PeriodicBasis::eval_all(std::span<const double> x, Eigen::Ref<Eigen::VectorXd> values,
                             Eigen::Ref<Eigen::MatrixXd> grads) const
{
    if (static_cast<int>(x.size()) != d_)
        throw ShapeError("point dimension differs from basis dimension");
    const int n = size();
    if (values.size() != n || grads.rows() != d_ || grads.cols() != n)
        throw ShapeError("eval_all: output buffers have wrong shape");
    Eigen::MatrixXd v1(p_, d_), g1(p_, d_);
    for (int k = 0; k < d_; ++k)
        for (int j = 0; j < p_; ++j) {
            double dv = 0.0;
            v1(j, k) = periodic_1d(j, x[static_cast<std::size_t>(k)], &dv);
            g1(j, k) = dv;
        }
    int idx[3] = {0, 0, 0};
    for (int i = 1; i <= n; ++i) {
        int rem = (i == n_b_ + 1) ? 0 : i;
        for (int k = 0; k < d_; ++k) {
            idx[k] = rem % p_;
            rem /= p_;
        }
        double value = 1.0;
        for (int k = 0; k < d_; ++k)
            value *= v1(idx[k], k);
        values(i - 1) = value;
        for (int a = 0; a < d_; ++a) {
            double g = g1(idx[a], a);
            for (int k = 0; k < d_; ++k)
                if (k != a)
                    g *= v1(idx[k], k);
            grads(a, i - 1) = g;
        }
    }
}

} // namespace pdeonet::spectral
