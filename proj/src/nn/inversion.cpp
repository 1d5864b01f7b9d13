#include "pdeonet/nn/calculus.hpp"

#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"
#include "stage.hpp"

#include <cmath>

namespace pdeonet::nn {

using detail::LinearForm;
using detail::StageBuilder;

namespace {

// Worst-case spectral-norm error after all groups when each matrix product
// has entrywise error e (so ||E||_2 <= N e). a_j = (1-delta)^{2^j} bounds
// ||A^{2^j}||, p_j = (1 - a_j)/delta bounds the partial sums.
double predicted_error(int N, double delta, int K, double e)
{
    const double ne = N * e;
    double a = std::pow(1.0 - delta, 2.0);
    double err_a = ne;   // A_1 = A^2
    double err_p = 0.0;  // P_1 = Id + A is exact
    for (int g = 2; g <= K; ++g) {
        const double p = (1.0 - a) / delta;
        err_p = err_p * (1.0 + a + err_a) + p * err_a + ne;
        err_a = err_a * (2.0 * a + err_a) + ne;
        a *= a;
    }
    return err_p;
}

} // namespace

InversionInfo inversion_plan(int N, const ApproxSpec& spec)
{
    if (N < 1)
        throw ShapeError("inversion_net needs N >= 1");
    if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0) || !(spec.delta > 0.0 && spec.delta < 1.0))
        throw PreconditionError("inversion_net needs epsilon, delta in (0,1)");
    InversionInfo info;
    info.epsilon_warning = spec.epsilon >= 0.25;
    info.m = m_terms(spec.epsilon, spec.delta);
    int K = 0;
    while ((1 << K) < info.m)
        ++K;
    info.squarings = K;
    info.product_bound = 1.0 / spec.delta + 1.0;
    if (K < 2)
        return info;
    // halve the per-product accuracy until the emulation error fits in eps/2
    double e = spec.epsilon / (2.0 * N);
    while (predicted_error(N, spec.delta, K, e) > 0.5 * spec.epsilon)
        e *= 0.5;
    info.entry_epsilon = e;
    info.predicted_error = predicted_error(N, spec.delta, K, e);
    info.sawtooth_steps = sawtooth_steps(e / N, info.product_bound);
    return info;
}

Network inversion_net(int N, const ApproxSpec& spec, InversionInfo* info_out)
{
    const InversionInfo info = inversion_plan(N, spec);
    if (info_out)
        *info_out = info;
    const int NN = N * N;
    auto at = [N](int i, int j) { return i + N * j; };
    if (info.squarings == 0) {
        // m = 1: (Id - A)^{-1} ~ Id
        std::vector<double> bias(static_cast<std::size_t>(NN), 0.0);
        for (int i = 0; i < N; ++i)
            bias[static_cast<std::size_t>(at(i, i))] = 1.0;
        return Network(NN, {Layer{SparseMatrix(NN, NN), std::move(bias)}});
    }
    if (info.squarings == 1) {
        std::vector<LinearForm> rows;
        for (int k = 0; k < NN; ++k)
            rows.push_back(LinearForm::var(k));
        for (int i = 0; i < N; ++i)
            rows[static_cast<std::size_t>(at(i, i))].constant = 1.0;
        return detail::forms_net(NN, rows);
    }
    const int K = info.squarings;
    const double eps = info.entry_epsilon / N;
    const double M = info.product_bound;

    // group 1: input vec(A), output (vec A^2, vec(Id + A))
    StageBuilder first(NN);
    std::vector<int> sq(static_cast<std::size_t>(NN * N)), pass(static_cast<std::size_t>(NN));
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k)
                sq[static_cast<std::size_t>(at(i, j) * N + k)] =
                    first.product(LinearForm::var(at(i, k)), LinearForm::var(at(k, j)), M);
    for (int k = 0; k < NN; ++k)
        pass[static_cast<std::size_t>(k)] = first.pass(LinearForm::var(k));
    for (int e = 0; e < NN; ++e) {
        LinearForm f;
        for (int k = 0; k < N; ++k)
            f.add(sq[static_cast<std::size_t>(e * N + k)], 1.0);
        first.output(std::move(f));
    }
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            LinearForm f = LinearForm::var(pass[static_cast<std::size_t>(at(i, j))]);
            f.constant = i == j ? 1.0 : 0.0;
            first.output(std::move(f));
        }
    Network net = first.build(eps);

    // groups 2..K: A_g = A_{g-1}^2, P_g = P_{g-1} + P_{g-1} A_{g-1}; the last
    // group only forms P_K. Inputs are (vec A_{g-1}, vec P_{g-1}).
    for (int g = 2; g <= K; ++g) {
        const bool last = g == K;
        StageBuilder st(2 * NN);
        std::vector<int> pa(static_cast<std::size_t>(NN * N));
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                if (!last)
                    for (int k = 0; k < N; ++k)
                        sq[static_cast<std::size_t>(at(i, j) * N + k)] =
                            st.product(LinearForm::var(at(i, k)), LinearForm::var(at(k, j)), M);
                for (int k = 0; k < N; ++k)
                    pa[static_cast<std::size_t>(at(i, j) * N + k)] =
                        st.product(LinearForm::var(NN + at(i, k)), LinearForm::var(at(k, j)), M);
            }
        for (int k = 0; k < NN; ++k)
            pass[static_cast<std::size_t>(k)] = st.pass(LinearForm::var(NN + k));
        if (!last)
            for (int e = 0; e < NN; ++e) {
                LinearForm f;
                for (int k = 0; k < N; ++k)
                    f.add(sq[static_cast<std::size_t>(e * N + k)], 1.0);
                st.output(std::move(f));
            }
        for (int e = 0; e < NN; ++e) {
            LinearForm f = LinearForm::var(pass[static_cast<std::size_t>(e)]);
            for (int k = 0; k < N; ++k)
                f.add(pa[static_cast<std::size_t>(e * N + k)], 1.0);
            st.output(std::move(f));
        }
        net = sparse_concat(st.build(eps), std::move(net));
    }
    return net;
}

} // namespace pdeonet::nn
