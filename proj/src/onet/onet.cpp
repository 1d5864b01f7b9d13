#include "pdeonet/onet/onet.hpp"

#include "pdeonet/nn/compose.hpp"
#include "pdeonet/nn/errors.hpp"
#include "pdeonet/nn/serialize.hpp"
#include "pdeonet/spectral/galerkin.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace pdeonet::onet {

using nn::Network;
using spectral::CoefficientField;
using spectral::CoefficientKind;
using spectral::Expr;
using spectral::PeriodicBasis;
using spectral::ProblemSpec;

int Encoder::input_dim() const
{
    switch (kind) {
    case EncoderKind::scalar:
        return rule.size();
    case EncoderKind::reaction_diffusion:
        return rule.size() * (rule.d * rule.d + 1);
    case EncoderKind::parametric:
        return parameter_dim;
    }
    return 0;
}

std::vector<double> Encoder::encode(const CoefficientField& coef) const
{
    if (coef.d != rule.d)
        throw ShapeError("encoder: coefficient dimension differs from encoder points");
    const int n = rule.size();
    if (kind == EncoderKind::scalar) {
        if (coef.kind != CoefficientKind::scalar)
            throw PreconditionError("scalar encoder needs a scalar coefficient");
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            v[static_cast<std::size_t>(k)] = coef.value(rule.node(k));
        return v;
    }
    if (kind == EncoderKind::reaction_diffusion) {
        if (coef.kind != CoefficientKind::reaction_diffusion)
            throw PreconditionError("reaction-diffusion encoder needs a matrix+reaction coefficient");
        const int d = rule.d;
        const int dd = d * d;
        std::vector<double> v(static_cast<std::size_t>(n * (dd + 1)));
        Eigen::MatrixXd M(d, d);
        for (int k = 0; k < n; ++k) {
            coef.matrix(rule.node(k), M);
            if ((M - M.transpose()).norm() > 1e-12)
                throw PreconditionError("diffusion matrix is not symmetric at an encoder point");
            for (int j = 0; j < dd; ++j)
                v[static_cast<std::size_t>(k * dd + j)] = M.data()[j];
            v[static_cast<std::size_t>(n * dd + k)] = coef.reaction(rule.node(k));
        }
        return v;
    }
    throw PreconditionError("parametric encoder reads parameters, not coefficient fields");
}

Encoder make_encoder(EncoderKind kind, int d, int q, int parameter_dim)
{
    Encoder e;
    e.kind = kind;
    e.rule = spectral::gauss_lobatto(q, d);
    e.parameter_dim = parameter_dim;
    return e;
}

nlohmann::json to_json(const BuildReport& r)
{
    nlohmann::json j = {{"p", r.p},
                        {"q", r.q},
                        {"n_b", r.n_b},
                        {"n_q", r.n_q},
                        {"branch_size", r.branch_size},
                        {"trunk_size", r.trunk_size},
                        {"branch_depth", r.branch_depth},
                        {"trunk_depth", r.trunk_depth},
                        {"eps_inv", r.eps_inv},
                        {"eps_u", r.eps_u},
                        {"eps_b", r.eps_b},
                        {"preconditioning", r.branch.mode == Preconditioning::left ? "left" : "symmetric"},
                        {"alpha", r.branch.alpha},
                        {"delta", r.branch.delta},
                        {"inversion_epsilon", r.branch.inner_epsilon},
                        {"transform_condition", r.branch.transform_condition},
                        {"neumann_terms", r.branch.inversion.m},
                        {"squarings", r.branch.inversion.squarings},
                        {"trunk_internal_epsilon", r.trunk.internal_epsilon},
                        {"trunk_h1_error", r.trunk.h1_error},
                        {"n_q_constant", r.n_q_constant},
                        {"build_seconds", r.build_seconds},
                        {"extra", r.extra}};
    if (r.plan)
        j["plan"] = to_json(*r.plan);
    return j;
}

Eigen::VectorXd OperatorNet::branch_vector(const CoefficientField& coef) const
{
    const std::vector<double> out = branch.realize(encoder.encode(coef));
    return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXd OperatorNet::branch_vector(std::span<const double> parameters) const
{
    if (encoder.kind != EncoderKind::parametric)
        throw PreconditionError("branch_vector(y) needs a parametric operator network");
    if (static_cast<int>(parameters.size()) != encoder.parameter_dim)
        throw ShapeError("parameter vector has the wrong length");
    const std::vector<double> out = branch.realize(parameters);
    return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

OnetField::OnetField(Network trunk, Eigen::VectorXd coefficients) : trunk_(std::move(trunk)), c_(std::move(coefficients))
{
    if (trunk_.output_dim() != c_.size())
        throw ShapeError("branch and trunk output dimensions differ");
}

double OnetField::eval(std::span<const double> x, std::span<double> grad) const
{
    if (grad.empty()) {
        const std::vector<double> t = trunk_.realize(x);
        return Eigen::Map<const Eigen::VectorXd>(t.data(), c_.size()).dot(c_);
    }
    Eigen::MatrixXd J;
    const std::vector<double> t = nn::realize_with_jacobian(trunk_, x, J);
    const Eigen::VectorXd g = J.transpose() * c_;
    for (std::size_t m = 0; m < grad.size(); ++m)
        grad[m] = g(static_cast<Eigen::Index>(m));
    return Eigen::Map<const Eigen::VectorXd>(t.data(), c_.size()).dot(c_);
}

Network with_constant_output(const Network& trunk)
{
    std::vector<nn::Layer> layers = trunk.layers();
    nn::Layer& last = layers.back();
    auto t = nn::triplets_of(last.weight);
    last.weight = nn::make_sparse(last.rows() + 1, last.cols(), t);
    last.bias.push_back(1.0);
    return Network(trunk.input_dim(), std::move(layers));
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Network make_trunk(int p, int d, double eps_b, bool with_constant, nn::PolyBasisInfo* info)
{
    Network t = nn::poly_basis_net(p, d, eps_b, info);
    return with_constant ? with_constant_output(t) : t;
}

OperatorNet assemble_onet(const ProblemSpec& problem, int p, int q, double eps_u, double eps_b,
                          const ClassBounds& bounds, std::optional<double> eps_inv)
{
    const auto t0 = std::chrono::steady_clock::now();
    const CoefficientField& coef = problem.coefficient;
    const bool rd = coef.kind == CoefficientKind::reaction_diffusion;
    const int d = coef.d;
    const PeriodicBasis basis(d, p, rd);
    Encoder encoder = make_encoder(rd ? EncoderKind::reaction_diffusion : EncoderKind::scalar, d, q);
    const spectral::QuadratureRule& quad = encoder.rule;
    const Eigen::VectorXd c_f = spectral::load_vector(basis, problem.source, q + 4);
    if (eps_inv) {
        const Eigen::VectorXd ct = spectral::spd_solve(spectral::reference_matrix(basis, quad), c_f);
        eps_u = std::max(*eps_inv * ct.norm(), 1e-300);
    }
    BuildReport report;
    Network branch = branch_coeff_net(basis, quad, c_f, eps_u, bounds, &report.branch);
    Network trunk = make_trunk(p, d, eps_b, rd, &report.trunk);
    OperatorNet onet{std::move(encoder), std::move(branch), std::move(trunk), std::move(report)};
    BuildReport& r = onet.report;
    r.p = p;
    r.q = q;
    r.n_b = basis.size();
    r.n_q = onet.encoder.rule.size();
    r.branch_size = onet.branch.size();
    r.trunk_size = onet.trunk.size();
    r.branch_depth = onet.branch.depth();
    r.trunk_depth = onet.trunk.depth();
    r.eps_inv = r.branch.eps_inv;
    r.eps_u = eps_u;
    r.eps_b = eps_b;
    r.build_seconds = seconds_since(t0);
    return onet;
}

void require_rd(const ProblemSpec& problem)
{
    if (problem.coefficient.kind != CoefficientKind::reaction_diffusion)
        throw PreconditionError("build_rd_onet needs a matrix+reaction coefficient");
}

} // namespace

OperatorNet build_onet(const ProblemSpec& problem, const BuildPlan& plan)
{
    if (plan.d != problem.coefficient.d)
        throw PlanError("plan dimension differs from the problem dimension");
    OperatorNet onet = assemble_onet(problem, plan.p, plan.q, plan.eps_u, plan.eps_b, plan.bounds, std::nullopt);
    onet.report.plan = plan;
    onet.report.n_q_constant =
        onet.report.n_q / (1.0 + std::pow(std::abs(std::log(plan.epsilon)), plan.d));
    return onet;
}

OperatorNet build_onet(const ProblemSpec& problem, const ExplicitBuild& params)
{
    if (params.q < params.p + 1)
        throw PreconditionError("explicit build needs q >= p+1");
    return assemble_onet(problem, params.p, params.q, 0.0, params.eps_b, ClassBounds::of(problem.coefficient),
                         params.eps_inv);
}

OperatorNet build_rd_onet(const ProblemSpec& problem, const BuildPlan& plan)
{
    require_rd(problem);
    return build_onet(problem, plan);
}

OperatorNet build_rd_onet(const ProblemSpec& problem, const ExplicitBuild& params)
{
    require_rd(problem);
    return build_onet(problem, params);
}

double eval_onet(const OperatorNet& onet, const CoefficientField& coef, std::span<const double> x)
{
    const Eigen::VectorXd c = onet.branch_vector(coef);
    const std::vector<double> t = onet.trunk.realize(x);
    return Eigen::Map<const Eigen::VectorXd>(t.data(), c.size()).dot(c);
}

OnetField eval_field(const OperatorNet& onet, const CoefficientField& coef)
{
    return OnetField(onet.trunk, onet.branch_vector(coef));
}

OnetField eval_field(const OperatorNet& onet, std::span<const double> parameters)
{
    return OnetField(onet.trunk, onet.branch_vector(parameters));
}

// ---- parametric

CoefficientField ParametricFamily::at(std::span<const double> y, int n, double lower, double upper) const
{
    if (static_cast<int>(y.size()) != d_p())
        throw ShapeError("parameter vector has the wrong length");
    const int terms_used = n < 0 ? terms() : std::min(n, terms());
    Expr a(0.0);
    for (int i = 0; i < terms_used; ++i) {
        const double ai = coefficients[static_cast<std::size_t>(i)].eval({}, y);
        if (ai != 0.0)
            a = a + Expr(ai) * modes[static_cast<std::size_t>(i)];
    }
    if (lower <= 0.0)
        lower = a_min;
    if (upper <= 0.0)
        upper = std::max(lower, 1.0);
    return CoefficientField::scalar(d, a, lower, upper);
}

double ParametricFamily::truncated_value(std::span<const double> y, std::span<const double> x, int n) const
{
    double s = 0.0;
    for (int i = 0; i < std::min(n, terms()); ++i)
        s += coefficients[static_cast<std::size_t>(i)].eval({}, y) * modes[static_cast<std::size_t>(i)].eval(x);
    return s;
}

ParametricFamily ParametricFamily::from_spec(const spectral::FamilySpec& spec, int d)
{
    ParametricFamily f;
    f.d = d;
    f.modes = spec.modes;
    f.coefficients = spec.coefficients;
    f.box = spec.box;
    f.a_min = spec.a_min;
    if (f.modes.empty() || f.box.empty())
        throw PreconditionError("parametric family needs modes and a parameter box");
    return f;
}

std::vector<std::vector<double>> parameter_grid(const ParametricFamily& fam, int per_axis)
{
    const int dp = fam.d_p();
    std::vector<std::vector<double>> out;
    std::vector<int> idx(static_cast<std::size_t>(dp), 0);
    while (true) {
        std::vector<double> y(static_cast<std::size_t>(dp));
        for (int m = 0; m < dp; ++m) {
            const auto [lo, hi] = fam.box[static_cast<std::size_t>(m)];
            y[static_cast<std::size_t>(m)] =
                per_axis == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[static_cast<std::size_t>(m)] / (per_axis - 1);
        }
        out.push_back(std::move(y));
        int m = 0;
        while (m < dp && ++idx[static_cast<std::size_t>(m)] == per_axis)
            idx[static_cast<std::size_t>(m++)] = 0;
        if (m == dp)
            break;
    }
    return out;
}

Eigen::MatrixXd mode_matrix(const ParametricFamily& family, const spectral::QuadratureRule& rule, int n_p)
{
    Eigen::MatrixXd V(rule.size(), n_p);
    for (int i = 0; i < rule.size(); ++i)
        for (int k = 0; k < n_p; ++k)
            V(i, k) = family.modes[static_cast<std::size_t>(k)].eval(rule.node(i));
    return V;
}

double measured_lipschitz(const std::vector<CoefficientField>& coefs, const Expr& f, int p,
                          const std::vector<double>& scales)
{
    double L = 0.0;
    for (const auto& c : coefs) {
        const auto u = spectral::galerkin_solve(c, f, p, p + 1);
        const Expr phase = Expr(2.0 * std::numbers::pi) * Expr::x(0);
        for (const Expr& psi : {cos(phase), sin(phase)})
            for (double s : scales) {
                CoefficientField pert = c;
                pert.a = c.a + Expr(s) * psi;
                pert.a_min = c.a_min - s;
                pert.a_max = c.a_max + s;
                const auto v = spectral::galerkin_solve(pert, f, p, p + 1);
                L = std::max(L, spectral::error_norms(v, u).h1 / s);
            }
    }
    return L;
}

OperatorNet build_parametric_onet(const ParametricFamily& family, const Expr& f, double epsilon,
                                  const ParametricOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw PlanError("parametric target epsilon must lie in (0,1)");
    const int d = family.d;
    const int np_all = family.terms();

    // x grid for sup norms: Gauss-Lobatto nodes plus a uniform grid
    std::vector<std::vector<double>> xs;
    {
        const int per_axis = d == 1 ? 129 : d == 2 ? 33 : 9;
        const auto uni = spectral::tensorize(
            {Eigen::VectorXd::LinSpaced(per_axis, 0.0, 1.0), Eigen::VectorXd::Ones(per_axis)}, d);
        for (int k = 0; k < uni.size(); ++k)
            xs.emplace_back(uni.node(k).begin(), uni.node(k).end());
    }
    const auto ys = parameter_grid(family, options.grid_points);
    const auto pilot_ys = parameter_grid(family, options.pilot_points);

    // sampled sup of |psi_i| and |a_i|
    std::vector<double> sup_psi(static_cast<std::size_t>(np_all), 0.0), sup_a(static_cast<std::size_t>(np_all), 0.0);
    for (int i = 0; i < np_all; ++i) {
        for (const auto& x : xs)
            sup_psi[static_cast<std::size_t>(i)] =
                std::max(sup_psi[static_cast<std::size_t>(i)], std::abs(family.modes[static_cast<std::size_t>(i)].eval(x)));
        for (const auto& y : ys)
            sup_a[static_cast<std::size_t>(i)] = std::max(
                sup_a[static_cast<std::size_t>(i)], std::abs(family.coefficients[static_cast<std::size_t>(i)].eval({}, y)));
    }
    const double A_psi = *std::max_element(sup_psi.begin(), sup_psi.end());

    // Lipschitz surrogate on the pilot coefficients
    double upper_full = 0.0;
    for (int i = 0; i < np_all; ++i)
        upper_full += sup_a[static_cast<std::size_t>(i)] * sup_psi[static_cast<std::size_t>(i)];
    std::vector<CoefficientField> pilot;
    for (const auto& y : pilot_ys)
        pilot.push_back(family.at(y, -1, family.a_min, upper_full));
    const int p_lip = d == 1 ? 12 : 6;
    const double L_hat = measured_lipschitz(pilot, f, p_lip, {1e-2 * family.a_min, 1e-3 * family.a_min});

    // tails
    std::vector<double> tails(static_cast<std::size_t>(np_all + 1), 0.0);
    for (int n = 0; n <= np_all; ++n)
        for (const auto& y : ys)
            for (const auto& x : xs) {
                const double full = family.truncated_value(y, x, np_all);
                tails[static_cast<std::size_t>(n)] =
                    std::max(tails[static_cast<std::size_t>(n)], std::abs(full - family.truncated_value(y, x, n)));
            }
    const double coef_budget = epsilon / (3.0 * std::max(L_hat, 1e-300));
    const double tail_target = std::min(0.5 * coef_budget, 0.5 * family.a_min);
    int n_p = -1;
    for (int n = 1; n <= np_all; ++n)
        if (tails[static_cast<std::size_t>(n)] <= tail_target) {
            n_p = n;
            break;
        }
    if (n_p < 0)
        throw FamilyDecayError("parametric tail does not fall below " + std::to_string(tail_target) +
                               " within " + std::to_string(np_all) + " modes on the test grid");
    const double tail = tails[static_cast<std::size_t>(n_p)];
    const double eps_p = std::min(coef_budget - tail, 0.25 * family.a_min) / (n_p * A_psi);

    // class of emulated truncated coefficients
    double upper = 0.0;
    for (int i = 0; i < n_p; ++i)
        upper += sup_a[static_cast<std::size_t>(i)] * sup_psi[static_cast<std::size_t>(i)];
    const ClassBounds inner{0.5 * family.a_min - n_p * eps_p * A_psi, upper + n_p * eps_p * A_psi};

    // inner plan calibrated on the pilot coefficients
    const int p_max = options.pilot_p_max > 0 ? options.pilot_p_max : (d == 1 ? 16 : 8);
    const Calibration cal = fit_calibration(pilot_errors(pilot, f, std::nullopt, 3, p_max));
    const double inner_eps = 2.0 * epsilon / 3.0;
    const BuildPlan plan =
        make_plan(inner_eps, d, inner, cal, max_solution_norm(pilot, f, std::max(plan_degree(inner_eps, cal), 4)));

    const PeriodicBasis basis(d, plan.p);
    Encoder encoder = make_encoder(EncoderKind::parametric, d, plan.q, family.d_p());
    const spectral::QuadratureRule quad = encoder.rule;
    BuildReport report;
    Network inner_branch = branch_coeff_net(basis, quad, f, plan.eps_u, inner, &report.branch);

    std::vector<nn::BoxFunction> funcs;
    for (int i = 0; i < n_p; ++i) {
        const Expr a_i = family.coefficients[static_cast<std::size_t>(i)];
        funcs.push_back([a_i](std::span<const double> y) { return a_i.eval({}, y); });
    }
    nn::AnalyticInfo ainfo;
    const Network coeffs = nn::analytic_approx_net(funcs, family.box, eps_p, &ainfo);
    const Eigen::MatrixXd V = mode_matrix(family, quad, n_p);
    const Network emulate = nn::concat(nn::affine_net(V, Eigen::VectorXd::Zero(V.rows())), coeffs);
    Network trunk = make_trunk(plan.p, d, plan.eps_b, false, &report.trunk);
    OperatorNet onet{std::move(encoder), nn::concat(inner_branch, std::move(emulate)), std::move(trunk), std::move(report)};

    // truncation guard at the encoder nodes
    double guard = std::numeric_limits<double>::infinity();
    for (const auto& y : ys)
        for (int k = 0; k < quad.size(); ++k)
            guard = std::min(guard, family.truncated_value(y, quad.node(k), n_p));

    BuildReport& r = onet.report;
    r.plan = plan;
    r.p = plan.p;
    r.q = plan.q;
    r.n_b = basis.size();
    r.n_q = quad.size();
    r.branch_size = onet.branch.size();
    r.trunk_size = onet.trunk.size();
    r.branch_depth = onet.branch.depth();
    r.trunk_depth = onet.trunk.depth();
    r.eps_inv = r.branch.eps_inv;
    r.eps_u = plan.eps_u;
    r.eps_b = plan.eps_b;
    r.n_q_constant = r.n_q / (1.0 + std::pow(std::abs(std::log(epsilon)), d));
    r.extra = {{"target_epsilon", epsilon},
               {"n_p", n_p},
               {"eps_p", eps_p},
               {"lipschitz", L_hat},
               {"tails", tails},
               {"tail", tail},
               {"A_psi", A_psi},
               {"truncation_min", guard},
               {"a_min", family.a_min},
               {"analytic_degree", ainfo.degree},
               {"analytic_error", ainfo.network_error},
               {"inner_coercivity", inner.coercivity},
               {"inner_continuity", inner.continuity}};
    r.build_seconds = seconds_since(t0);
    return onet;
}

// ---- bundles

namespace {

const char* kind_name(EncoderKind k)
{
    switch (k) {
    case EncoderKind::scalar:
        return "scalar";
    case EncoderKind::reaction_diffusion:
        return "reaction_diffusion";
    case EncoderKind::parametric:
        return "parametric";
    }
    return "scalar";
}

EncoderKind kind_from(const std::string& s)
{
    if (s == "scalar")
        return EncoderKind::scalar;
    if (s == "reaction_diffusion")
        return EncoderKind::reaction_diffusion;
    if (s == "parametric")
        return EncoderKind::parametric;
    throw PreconditionError("unknown encoder kind '" + s + "'");
}

} // namespace

void save_bundle(const OperatorNet& onet, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    nn::save_network(onet.branch, dir / "branch.json");
    nn::save_network(onet.trunk, dir / "trunk.json");
    nlohmann::json points = nlohmann::json::array();
    for (int k = 0; k < onet.encoder.rule.size(); ++k) {
        const auto x = onet.encoder.rule.node(k);
        points.push_back(std::vector<double>(x.begin(), x.end()));
    }
    const nlohmann::json meta = {{"encoder",
                                  {{"kind", kind_name(onet.encoder.kind)},
                                   {"d", onet.encoder.rule.d},
                                   {"q", onet.encoder.rule.q},
                                   {"parameter_dim", onet.encoder.parameter_dim},
                                   {"points", points}}},
                                 {"report", to_json(onet.report)}};
    std::ofstream out(dir / "meta.json");
    if (!out)
        throw std::runtime_error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

OperatorNet load_bundle(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "meta.json");
    if (!in)
        throw PreconditionError("cannot open " + (dir / "meta.json").string());
    const nlohmann::json meta = nlohmann::json::parse(in);
    const auto& e = meta.at("encoder");
    OperatorNet onet{make_encoder(kind_from(e.at("kind")), e.at("d"), e.at("q"), e.value("parameter_dim", 0)),
                     nn::load_network(dir / "branch.json"), nn::load_network(dir / "trunk.json"), {}};
    const auto& r = meta.at("report");
    onet.report.p = r.at("p");
    onet.report.q = r.at("q");
    onet.report.n_b = r.at("n_b");
    onet.report.n_q = r.at("n_q");
    onet.report.branch_size = onet.branch.size();
    onet.report.trunk_size = onet.trunk.size();
    onet.report.branch_depth = onet.branch.depth();
    onet.report.trunk_depth = onet.trunk.depth();
    onet.report.eps_inv = r.value("eps_inv", 0.0);
    onet.report.eps_u = r.value("eps_u", 0.0);
    onet.report.eps_b = r.value("eps_b", 0.0);
    if (r.contains("plan"))
        onet.report.plan = plan_from_json(r.at("plan"));
    onet.report.extra = r.value("extra", nlohmann::json::object());
    if (onet.branch.output_dim() != onet.trunk.output_dim())
        throw ShapeError("bundle: branch and trunk output dimensions differ");
    if (onet.branch.input_dim() != onet.encoder.input_dim())
        throw ShapeError("bundle: branch input does not match the encoder");
    return onet;
}

} // namespace pdeonet::onet
