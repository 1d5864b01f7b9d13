#include "stage.hpp"

#include "pdeonet/nn/calculus.hpp"
#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"

#include <algorithm>

namespace pdeonet::nn::detail {

Network forms_net(int input_dim, const std::vector<LinearForm>& rows)
{
    std::vector<Triplet> t;
    std::vector<double> bias;
    bias.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& [col, c] : rows[r].terms)
            t.push_back({static_cast<int>(r), col, c});
        bias.push_back(rows[r].constant);
    }
    return Network(input_dim, {Layer{make_sparse(static_cast<int>(rows.size()), input_dim, t), std::move(bias)}});
}

int StageBuilder::pass(LinearForm f)
{
    kinds_.push_back(-1);
    slot_.push_back(static_cast<int>(passes_.size()));
    passes_.push_back(std::move(f));
    return items() - 1;
}

int StageBuilder::product(LinearForm a, LinearForm b, double bound)
{
    kinds_.push_back(static_cast<int>(products_.size()));
    slot_.push_back(-1);
    products_.push_back({std::move(a), std::move(b), std::max(bound, 1.0)});
    return items() - 1;
}

Network StageBuilder::build(double eps) const
{
    if (outputs_.empty())
        throw PreconditionError("stage without outputs");
    if (kinds_.empty()) {
        std::vector<LinearForm> rows;
        for (const auto& o : outputs_) {
            if (!o.terms.empty())
                throw PreconditionError("stage output refers to a missing item");
            rows.push_back(o);
        }
        return forms_net(input_dim_, rows);
    }
    std::vector<Network> members;
    const int n_pass = static_cast<int>(passes_.size());
    if (n_pass > 0)
        members.push_back(forms_net(input_dim_, passes_));
    if (!products_.empty()) {
        // all products of one bound share the same structure; build it once
        std::vector<std::pair<double, Network>> cache;
        for (const auto& p : products_) {
            auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == p.bound; });
            if (it == cache.end()) {
                cache.emplace_back(p.bound, product_net({eps, p.bound, 0.5}));
                it = cache.end() - 1;
            }
            members.push_back(concat(it->second, forms_net(input_dim_, {p.a, p.b})));
        }
    }
    Network parallel = parallelize(members, InputSharing::shared);
    std::vector<int> column(kinds_.size());
    for (std::size_t i = 0; i < kinds_.size(); ++i)
        column[i] = kinds_[i] < 0 ? slot_[i] : n_pass + kinds_[i];
    std::vector<LinearForm> rows;
    rows.reserve(outputs_.size());
    for (const auto& o : outputs_) {
        LinearForm r;
        r.constant = o.constant;
        for (const auto& [item, c] : o.terms)
            r.terms.emplace_back(column[static_cast<std::size_t>(item)], c);
        rows.push_back(std::move(r));
    }
    Network forms = forms_net(parallel.output_dim(), rows);
    return concat(std::move(forms), std::move(parallel));
}

Network recurrence_net(const ThreeTerm& rec, int n, double eps)
{
    if (n < 1)
        throw PreconditionError("recurrence_net needs n >= 1");
    LinearForm s = LinearForm::var(0, rec.scale);
    s.constant = rec.shift;
    Network net = forms_net(1, {s});
    for (int k = 1; k < n; ++k) {
        StageBuilder st(k);
        for (int j = 0; j < k; ++j)
            st.pass(LinearForm::var(j));
        const int prod = st.product(LinearForm::var(0), LinearForm::var(k - 1), rec.bound);
        for (int j = 0; j < k; ++j)
            st.output(LinearForm::var(j));
        LinearForm next = LinearForm::var(prod, rec.alpha[static_cast<std::size_t>(k)]);
        const double beta = rec.beta[static_cast<std::size_t>(k)];
        if (k == 1)
            next.constant = beta;
        else
            next.add(k - 2, beta);
        st.output(next);
        net = concat(st.build(eps), std::move(net));
    }
    return net;
}

Network tensor_net(int input_dim, const std::vector<std::vector<LinearForm>>& term_factors,
                   double factor_bound, const std::vector<LinearForm>& outputs, double eps)
{
    const std::size_t n_terms = term_factors.size();
    bool triple = false;
    for (const auto& f : term_factors) {
        if (f.size() > 3)
            throw PreconditionError("tensor_net supports at most three factors per term");
        triple = triple || f.size() == 3;
    }
    // stage A: single factors passed, first pair multiplied
    StageBuilder a(input_dim);
    std::vector<int> item(n_terms, -1), third(n_terms, -1);
    for (std::size_t t = 0; t < n_terms; ++t) {
        const auto& f = term_factors[t];
        if (f.size() == 1)
            item[t] = a.pass(f[0]);
        else if (f.size() >= 2)
            item[t] = a.product(f[0], f[1], factor_bound);
        if (f.size() == 3)
            third[t] = a.pass(f[2]);
    }
    auto finish = [&](StageBuilder& st, const std::vector<int>& value_item) {
        for (const auto& o : outputs) {
            LinearForm r;
            r.constant = o.constant;
            for (const auto& [t, c] : o.terms) {
                const int it = value_item[static_cast<std::size_t>(t)];
                if (it < 0)
                    r.constant += c;
                else
                    r.add(it, c);
            }
            st.output(std::move(r));
        }
    };
    if (!triple) {
        finish(a, item);
        return a.build(eps);
    }
    // stage A exposes every item; stage B multiplies by the third factor
    for (int i = 0; i < a.items(); ++i)
        a.output(LinearForm::var(i));
    StageBuilder b(a.items());
    std::vector<int> final_item(n_terms, -1);
    const double pair_bound = factor_bound * factor_bound;
    for (std::size_t t = 0; t < n_terms; ++t) {
        if (item[t] < 0)
            continue;
        if (third[t] < 0)
            final_item[t] = b.pass(LinearForm::var(item[t]));
        else
            final_item[t] = b.product(LinearForm::var(item[t]), LinearForm::var(third[t]),
                                      std::max(pair_bound, factor_bound));
    }
    finish(b, final_item);
    return concat(b.build(eps), a.build(eps));
}

} // namespace pdeonet::nn::detail
