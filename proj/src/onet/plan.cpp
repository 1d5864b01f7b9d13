#include "pdeonet/onet/plan.hpp"

#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdeonet::onet {

using spectral::CoefficientField;
using spectral::Expr;

Calibration fit_calibration(const std::vector<PilotRow>& rows)
{
    if (rows.size() < 2)
        throw PlanError("calibration needs at least two pilot degrees, got " + std::to_string(rows.size()));
    Eigen::MatrixXd X(rows.size(), 2);
    Eigen::VectorXd y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i].error > 0.0))
            throw PlanError("calibration: nonpositive pilot error at p=" + std::to_string(rows[i].p));
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = rows[i].p;
        y(static_cast<Eigen::Index>(i)) = std::log(rows[i].error);
    }
    const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
    Calibration cal;
    cal.b_G = -c(1);
    cal.fit_intercept = c(0);
    if (!(cal.b_G > 0.0))
        throw PlanError("calibration: fitted decay rate b_G=" + std::to_string(cal.b_G) + " is not positive");
    const Eigen::VectorXd r = y - X * c;
    cal.fit_residual = r.cwiseAbs().maxCoeff();
    cal.C_G = std::exp(c(0) + r.maxCoeff());
    return cal;
}

int plan_degree(double epsilon, const Calibration& cal)
{
    if (!cal.valid())
        throw PlanError("calibration constants missing; run calibrate or give explicit p, q");
    if (!(epsilon > 0.0))
        throw PlanError("target epsilon must be positive");
    const double p = (std::log(cal.C_G) - std::log(epsilon / 3.0)) / cal.b_G;
    return std::max(2, static_cast<int>(std::ceil(p - 1e-12)));
}

BuildPlan make_plan(double epsilon, int d, const ClassBounds& bounds, const Calibration& cal, double sup_u_measured,
                    bool reaction_diffusion)
{
    BuildPlan plan;
    plan.epsilon = epsilon;
    plan.d = d;
    plan.reaction_diffusion = reaction_diffusion;
    plan.calibration = cal;
    plan.p = plan_degree(epsilon, cal);
    plan.q = plan.p + 1;
    plan.n_b = static_cast<int>(std::lround(std::pow(plan.p, d))) - 1 + (reaction_diffusion ? 1 : 0);
    plan.n_q = static_cast<int>(std::lround(std::pow(plan.q, d)));
    plan.bounds = bounds;
    plan.alpha = bounds.alpha();
    plan.delta = bounds.delta();
    plan.C_pol = 4.0 * std::sqrt(static_cast<double>(d));
    plan.sup_u = plan.sup_u_slack * sup_u_measured;
    const double nb = plan.n_b;
    plan.eps_G = epsilon / 3.0;
    plan.eps_u = epsilon /
                 (3.0 * std::sqrt(1.0 + plan.C_pol * plan.C_pol * std::pow(nb, 4.0 / d)) * std::sqrt(nb));
    plan.eps_b = epsilon / (3.0 * nb * (2.0 + plan.sup_u));
    for (double e : {plan.eps_G, plan.eps_u, plan.eps_b})
        if (!(e > 0.0 && e < 1.0))
            throw PlanError("infeasible budget split for eps=" + std::to_string(epsilon) +
                            "; use a smaller eps or explicit p, q, eps_inv, eps_b");
    if (!(plan.alpha * bounds.continuity < 1.0))
        throw PlanError("alpha C_cont must be below 1");
    return plan;
}

nlohmann::json to_json(const BuildPlan& p)
{
    return {{"epsilon", p.epsilon},
            {"d", p.d},
            {"reaction_diffusion", p.reaction_diffusion},
            {"p", p.p},
            {"q", p.q},
            {"n_b", p.n_b},
            {"n_q", p.n_q},
            {"eps_G", p.eps_G},
            {"eps_u", p.eps_u},
            {"eps_b", p.eps_b},
            {"coercivity", p.bounds.coercivity},
            {"continuity", p.bounds.continuity},
            {"alpha", p.alpha},
            {"delta", p.delta},
            {"C_G", p.calibration.C_G},
            {"b_G", p.calibration.b_G},
            {"fit_intercept", p.calibration.fit_intercept},
            {"fit_residual", p.calibration.fit_residual},
            {"C_pol", p.C_pol},
            {"sup_u", p.sup_u},
            {"sup_u_slack", p.sup_u_slack}};
}

BuildPlan plan_from_json(const nlohmann::json& j)
{
    BuildPlan p;
    p.epsilon = j.at("epsilon");
    p.d = j.at("d");
    p.reaction_diffusion = j.value("reaction_diffusion", false);
    p.p = j.at("p");
    p.q = j.at("q");
    p.n_b = j.at("n_b");
    p.n_q = j.at("n_q");
    p.eps_G = j.at("eps_G");
    p.eps_u = j.at("eps_u");
    p.eps_b = j.at("eps_b");
    p.bounds = {j.at("coercivity"), j.at("continuity")};
    p.alpha = j.at("alpha");
    p.delta = j.at("delta");
    p.calibration.C_G = j.at("C_G");
    p.calibration.b_G = j.at("b_G");
    p.calibration.fit_intercept = j.value("fit_intercept", 0.0);
    p.calibration.fit_residual = j.value("fit_residual", 0.0);
    p.C_pol = j.at("C_pol");
    p.sup_u = j.at("sup_u");
    p.sup_u_slack = j.value("sup_u_slack", 1.2);
    return p;
}

spectral::SolutionField reference_solution(const CoefficientField& coef, const Expr& f)
{
    const int p = coef.d == 1 ? 40 : coef.d == 2 ? 16 : 7;
    return spectral::galerkin_solve(coef, f, p, p + 1);
}

double galerkin_h1_error(const CoefficientField& coef, const Expr& f, const std::optional<Expr>& exact, int p)
{
    const spectral::SolutionField u = spectral::galerkin_solve(coef, f, p, p + 1);
    if (exact)
        return spectral::error_norms(spectral::ExprField(coef.d, *exact), u).h1;
    const spectral::SolutionField ref = reference_solution(coef, f);
    return spectral::error_norms(ref, u).h1;
}

std::vector<PilotRow> pilot_errors(const std::vector<CoefficientField>& coefs, const Expr& f,
                                   const std::optional<Expr>& exact, int p_lo, int p_hi)
{
    std::vector<spectral::SolutionField> refs;
    if (!exact)
        for (const auto& c : coefs)
            refs.push_back(reference_solution(c, f));
    std::vector<PilotRow> rows;
    for (int p = p_lo; p <= p_hi; ++p) {
        PilotRow row{p, 0.0};
        for (std::size_t i = 0; i < coefs.size(); ++i) {
            const auto u = spectral::galerkin_solve(coefs[i], f, p, p + 1);
            const double e = exact ? spectral::error_norms(spectral::ExprField(coefs[i].d, *exact), u).h1
                                   : spectral::error_norms(refs[i], u).h1;
            row.error = std::max(row.error, e);
        }
        rows.push_back(row);
    }
    return rows;
}

double max_solution_norm(const std::vector<CoefficientField>& coefs, const Expr& f, int p)
{
    double m = 0.0;
    for (const auto& c : coefs) {
        const auto u = spectral::galerkin_solve(c, f, p, p + 1);
        m = std::max(m, spectral::error_norms(spectral::ZeroField(c.d), u).l2);
    }
    return m;
}

} // namespace pdeonet::onet
