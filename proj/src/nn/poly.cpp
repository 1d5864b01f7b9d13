#include "pdeonet/nn/calculus.hpp"

#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/basis.hpp"
#include "pdeonet/spectral/field.hpp"
#include "pdeonet/spectral/quadrature.hpp"
#include "stage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pdeonet::nn {

using detail::LinearForm;

namespace {

constexpr int max_escalations = 40;

Network legendre_basis_net(int p, int d, double eps)
{
    detail::ThreeTerm rec{2.0, -1.0, std::vector<double>(static_cast<std::size_t>(p)),
                          std::vector<double>(static_cast<std::size_t>(p)), 1.25};
    for (int k = 1; k < p; ++k) {
        rec.alpha[static_cast<std::size_t>(k)] = (2.0 * k + 1.0) / (k + 1.0);
        rec.beta[static_cast<std::size_t>(k)] = -static_cast<double>(k) / (k + 1.0);
    }
    const Network axis = detail::recurrence_net(rec, p, eps);
    std::vector<Network> axes(static_cast<std::size_t>(d), axis);
    const Network values = d == 1 ? axis : parallelize(axes, InputSharing::stacked);

    // axis c holds L_1..L_p at c*p + 0 .. c*p + p-1
    const spectral::PeriodicBasis basis(d, p);
    std::vector<std::vector<LinearForm>> factors;
    std::vector<LinearForm> outputs;
    for (int i = 1; i <= basis.n_b(); ++i) {
        const auto mi = basis.multi_index(i);
        std::vector<LinearForm> f;
        for (int c = 0; c < d; ++c) {
            const int j = mi[static_cast<std::size_t>(c)];
            if (j == 0)
                continue;
            LinearForm phi = LinearForm::var(c * p + j);
            if (j % 2 == 0)
                phi.add(c * p, -1.0);
            f.push_back(std::move(phi));
        }
        factors.push_back(std::move(f));
        outputs.push_back(LinearForm::var(i - 1));
    }
    return concat(detail::tensor_net(d * p, factors, 2.5, outputs, eps), values);
}

} // namespace

double poly_basis_h1_error(const Network& net, int p, int d)
{
    const spectral::PeriodicBasis basis(d, p);
    const int nb = basis.n_b();
    if (net.input_dim() != d || net.output_dim() != nb)
        throw ShapeError("poly basis net has the wrong shape");
    const spectral::QuadratureRule rule = spectral::network_error_rule(d);
    Eigen::VectorXd err = Eigen::VectorXd::Zero(nb);
    Eigen::VectorXd v(nb);
    Eigen::MatrixXd g(d, nb);
    Eigen::MatrixXd J;
    for (int k = 0; k < rule.size(); ++k) {
        const auto x = rule.node(k);
        basis.eval_all(x, v, g);
        const auto out = realize_with_jacobian(net, x, J);
        for (int i = 0; i < nb; ++i) {
            double e = (out[static_cast<std::size_t>(i)] - v(i)) * (out[static_cast<std::size_t>(i)] - v(i));
            for (int c = 0; c < d; ++c)
                e += (J(i, c) - g(c, i)) * (J(i, c) - g(c, i));
            err(i) += rule.weights(k) * e;
        }
    }
    return std::sqrt(err.maxCoeff());
}

Network poly_basis_net(int p, int d, double eps_b, PolyBasisInfo* info)
{
    if (p < 2 || d < 1 || d > 3)
        throw PreconditionError("poly_basis_net needs p >= 2 and 1 <= d <= 3");
    if (!(eps_b > 0.0 && eps_b < 1.0))
        throw PreconditionError("eps_b must lie in (0,1)");
    // derivative errors of the product nets scale like sqrt(eps), so start
    // from eps_b^2 and halve as needed
    double eps = std::min(0.25, 0.5 * eps_b * eps_b);
    for (int it = 0; it <= max_escalations; ++it) {
        Network net = legendre_basis_net(p, d, eps);
        const double err = poly_basis_h1_error(net, p, d);
        if (err <= eps_b) {
            if (info)
                *info = {eps, it, err};
            return net;
        }
        // skip ahead by the number of halvings the sqrt(eps) scaling predicts
        const int halvings = std::max(1, static_cast<int>(std::ceil(2.0 * std::log2(err / eps_b))));
        eps = std::ldexp(eps, -halvings);
    }
    throw ApproximationError("poly_basis_net could not reach H1 accuracy " + std::to_string(eps_b));
}

namespace {

struct Chebyshev {
    int n = 0;                       // degree per axis
    int dp = 1;
    std::vector<Eigen::VectorXd> coeffs; // per function, (n+1)^dp, axis 0 fastest
};

int ipow(int b, int e)
{
    int r = 1;
    for (int k = 0; k < e; ++k)
        r *= b;
    return r;
}

Chebyshev interpolate(const std::vector<BoxFunction>& funcs, const std::vector<std::pair<double, double>>& box,
                      int n)
{
    const int dp = static_cast<int>(box.size());
    const int m = n + 1;
    const int total = ipow(m, dp);
    Chebyshev ch{n, dp, {}};
    std::vector<double> y(static_cast<std::size_t>(dp));
    for (const auto& f : funcs) {
        Eigen::VectorXd vals(total);
        for (int idx = 0; idx < total; ++idx) {
            int rem = idx;
            for (int a = 0; a < dp; ++a) {
                const int j = rem % m;
                rem /= m;
                const double s = std::cos(std::numbers::pi * j / n);
                const auto [lo, hi] = box[static_cast<std::size_t>(a)];
                y[static_cast<std::size_t>(a)] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s;
            }
            vals(idx) = f(y);
        }
        // DCT-I along each axis
        for (int a = 0; a < dp; ++a) {
            const int stride = ipow(m, a);
            Eigen::VectorXd out(total);
            for (int idx = 0; idx < total; ++idx) {
                const int k = (idx / stride) % m;
                const int base = idx - k * stride;
                double s = 0.0;
                for (int j = 0; j <= n; ++j) {
                    const double w = (j == 0 || j == n) ? 0.5 : 1.0;
                    s += w * vals(base + j * stride) * std::cos(std::numbers::pi * j * k / n);
                }
                s *= 2.0 / n;
                if (k == 0 || k == n)
                    s *= 0.5;
                out(idx) = s;
            }
            vals = out;
        }
        ch.coeffs.push_back(std::move(vals));
    }
    return ch;
}

double cheb_eval(const Chebyshev& ch, const Eigen::VectorXd& c, std::span<const double> s)
{
    const int m = ch.n + 1;
    std::vector<std::vector<double>> T(static_cast<std::size_t>(ch.dp), std::vector<double>(static_cast<std::size_t>(m)));
    for (int a = 0; a < ch.dp; ++a) {
        auto& t = T[static_cast<std::size_t>(a)];
        t[0] = 1.0;
        if (m > 1)
            t[1] = s[static_cast<std::size_t>(a)];
        for (int k = 2; k < m; ++k)
            t[static_cast<std::size_t>(k)] = 2.0 * s[static_cast<std::size_t>(a)] * t[static_cast<std::size_t>(k - 1)] - t[static_cast<std::size_t>(k - 2)];
    }
    double r = 0.0;
    for (int idx = 0; idx < c.size(); ++idx) {
        if (c(idx) == 0.0)
            continue;
        int rem = idx;
        double term = c(idx);
        for (int a = 0; a < ch.dp; ++a) {
            term *= T[static_cast<std::size_t>(a)][static_cast<std::size_t>(rem % m)];
            rem /= m;
        }
        r += term;
    }
    return r;
}

std::vector<std::vector<double>> sample_points(const std::vector<std::pair<double, double>>& box)
{
    const int dp = static_cast<int>(box.size());
    std::vector<std::vector<double>> pts;
    constexpr int count = 10000;
    if (dp == 1) {
        for (int k = 0; k < count; ++k) {
            const double t = static_cast<double>(k) / (count - 1);
            pts.push_back({box[0].first + t * (box[0].second - box[0].first)});
        }
        return pts;
    }
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int corner = 0; corner < (1 << dp); ++corner) {
        std::vector<double> y;
        for (int a = 0; a < dp; ++a)
            y.push_back((corner >> a) & 1 ? box[static_cast<std::size_t>(a)].second : box[static_cast<std::size_t>(a)].first);
        pts.push_back(y);
    }
    while (static_cast<int>(pts.size()) < count) {
        std::vector<double> y;
        for (const auto& [lo, hi] : box)
            y.push_back(lo + u(rng) * (hi - lo));
        pts.push_back(y);
    }
    return pts;
}

} // namespace

Network analytic_approx_net(const std::vector<BoxFunction>& funcs,
                            const std::vector<std::pair<double, double>>& box, double eps, AnalyticInfo* info)
{
    if (funcs.empty())
        throw PreconditionError("analytic_approx_net needs at least one function");
    if (box.empty() || box.size() > 3)
        throw PreconditionError("parameter box must have dimension 1..3");
    for (const auto& [lo, hi] : box)
        if (!(hi > lo))
            throw PreconditionError("parameter box has an empty side");
    if (!(eps > 0.0 && eps < 1.0))
        throw PreconditionError("eps must lie in (0,1)");
    const int dp = static_cast<int>(box.size());
    const auto pts = sample_points(box);
    std::vector<std::vector<double>> exact(funcs.size());
    for (std::size_t f = 0; f < funcs.size(); ++f)
        for (const auto& y : pts)
            exact[f].push_back(funcs[f](y));
    auto to_s = [&](const std::vector<double>& y) {
        std::vector<double> s(y.size());
        for (std::size_t a = 0; a < y.size(); ++a)
            s[a] = (2.0 * y[a] - box[a].first - box[a].second) / (box[a].second - box[a].first);
        return s;
    };

    // degree doubling until the interpolant is within eps/2
    const int max_degree = dp == 1 ? 512 : (dp == 2 ? 64 : 24);
    Chebyshev ch;
    double interp_err = 0.0;
    for (int n = 2;; n *= 2) {
        if (n > max_degree)
            throw ApproximationError("Chebyshev degree escalation failed to reach eps/2");
        ch = interpolate(funcs, box, n);
        double scale = 0.0;
        for (const auto& c : ch.coeffs)
            scale = std::max(scale, c.cwiseAbs().maxCoeff());
        for (auto& c : ch.coeffs)
            for (int i = 0; i < c.size(); ++i)
                if (std::abs(c(i)) <= 1e-14 * scale)
                    c(i) = 0.0;
        interp_err = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const auto s = to_s(pts[k]);
            for (std::size_t f = 0; f < funcs.size(); ++f)
                interp_err = std::max(interp_err, std::abs(cheb_eval(ch, ch.coeffs[f], s) - exact[f][k]));
        }
        if (interp_err <= 0.5 * eps)
            break;
    }

    // effective degree per axis and the list of terms with nonzero coefficients
    const int m = ch.n + 1;
    const int total = ipow(m, dp);
    std::vector<int> deg(static_cast<std::size_t>(dp), 1);
    std::vector<int> used;
    for (int idx = 1; idx < total; ++idx) {
        bool nonzero = false;
        for (const auto& c : ch.coeffs)
            nonzero = nonzero || c(idx) != 0.0;
        if (!nonzero)
            continue;
        used.push_back(idx);
        int rem = idx;
        for (int a = 0; a < dp; ++a) {
            deg[static_cast<std::size_t>(a)] = std::max(deg[static_cast<std::size_t>(a)], rem % m);
            rem /= m;
        }
    }
    std::vector<int> offset(static_cast<std::size_t>(dp), 0);
    for (int a = 1; a < dp; ++a)
        offset[static_cast<std::size_t>(a)] = offset[static_cast<std::size_t>(a - 1)] + deg[static_cast<std::size_t>(a - 1)];
    const int n_values = offset.back() + deg.back();

    std::vector<std::vector<LinearForm>> factors;
    for (int idx : used) {
        std::vector<LinearForm> f;
        int rem = idx;
        for (int a = 0; a < dp; ++a) {
            const int k = rem % m;
            rem /= m;
            if (k > 0)
                f.push_back(LinearForm::var(offset[static_cast<std::size_t>(a)] + k - 1));
        }
        factors.push_back(std::move(f));
    }
    std::vector<LinearForm> outputs;
    double coeff_sum = 0.0;
    for (const auto& c : ch.coeffs) {
        LinearForm o;
        o.constant = c(0);
        for (std::size_t t = 0; t < used.size(); ++t)
            if (c(used[t]) != 0.0)
                o.add(static_cast<int>(t), c(used[t]));
        coeff_sum = std::max(coeff_sum, c.cwiseAbs().sum());
        outputs.push_back(std::move(o));
    }

    auto build = [&](double e) {
        std::vector<Network> axes;
        for (int a = 0; a < dp; ++a) {
            const int n = deg[static_cast<std::size_t>(a)];
            const auto [lo, hi] = box[static_cast<std::size_t>(a)];
            detail::ThreeTerm rec{2.0 / (hi - lo), -(lo + hi) / (hi - lo),
                                  std::vector<double>(static_cast<std::size_t>(n), 2.0),
                                  std::vector<double>(static_cast<std::size_t>(n), -1.0), 1.25};
            axes.push_back(detail::recurrence_net(rec, n, e));
        }
        const Network values = dp == 1 ? axes[0] : parallelize(axes, InputSharing::stacked);
        return concat(detail::tensor_net(n_values, factors, 1.25, outputs, e), values);
    };
    auto net_error = [&](const Network& net) {
        double err = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const auto out = net.realize(pts[k]);
            for (std::size_t f = 0; f < funcs.size(); ++f)
                err = std::max(err, std::abs(out[f] - exact[f][k]));
        }
        return err;
    };

    double e = std::min(0.5, eps / (4.0 * std::max(1.0, coeff_sum) * std::max(1, ch.n)));
    for (int it = 0; it <= max_escalations; ++it) {
        Network net = build(e);
        const double err = net_error(net);
        if (err <= eps) {
            if (info)
                *info = {*std::max_element(deg.begin(), deg.end()), interp_err, err, e};
            return net;
        }
        e *= 0.5;
    }
    throw ApproximationError("analytic_approx_net could not reach the requested accuracy");
}

} // namespace pdeonet::nn
