#pragma once

#include "pdeonet/onet/branch.hpp"
#include "pdeonet/spectral/coefficient.hpp"
#include "pdeonet/spectral/expr.hpp"
#include "pdeonet/spectral/field.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace pdeonet::onet {

// Galerkin error model err(p) <= C_G exp(-b_G p)
struct Calibration {
    double C_G = 0.0;
    double b_G = 0.0;
    double fit_intercept = 0.0;  // least-squares log C before the envelope shift
    double fit_residual = 0.0;   // max |log residual|
    bool valid() const { return C_G > 0.0 && b_G > 0.0; }
};

struct PilotRow {
    int p = 0;
    double error = 0.0; // sup of the H1 error over the pilot coefficients
};

// Least-squares fit of log error against p, then C_G raised so that every
// pilot point lies under the curve. Throws PlanError when b_G <= 0 or fewer
// than two rows are given.
Calibration fit_calibration(const std::vector<PilotRow>& rows);

// Smallest p >= 2 with C_G exp(-b_G p) <= eps/3.
int plan_degree(double epsilon, const Calibration& cal);

struct BuildPlan {
    double epsilon = 0.0;
    int d = 1;
    bool reaction_diffusion = false;
    int p = 0, q = 0, n_b = 0, n_q = 0;
    double eps_G = 0.0, eps_u = 0.0, eps_b = 0.0;
    ClassBounds bounds;
    double alpha = 0.0, delta = 0.0;
    Calibration calibration;
    double C_pol = 0.0;
    double sup_u = 0.0;         // slack * measured
    double sup_u_slack = 1.2;
};

// Budget split: eps_G = eps/3, eps_u = eps / (3 (1 + C_pol^2 n_b^{4/d})^{1/2} n_b^{1/2}),
// eps_b = eps / (3 n_b (2 + sup_u)). Throws PlanError for infeasible budgets.
BuildPlan make_plan(double epsilon, int d, const ClassBounds& bounds, const Calibration& cal,
                    double sup_u_measured, bool reaction_diffusion = false);

nlohmann::json to_json(const BuildPlan& plan);
BuildPlan plan_from_json(const nlohmann::json& j);

// High-order Galerkin solution used in place of an exact solution.
spectral::SolutionField reference_solution(const spectral::CoefficientField& coef, const spectral::Expr& f);

// H1 error of the degree-p Galerkin solution against `exact` when given, else
// against reference_solution.
double galerkin_h1_error(const spectral::CoefficientField& coef, const spectral::Expr& f,
                         const std::optional<spectral::Expr>& exact, int p);

// sup over the coefficients for each p in [p_lo, p_hi]
std::vector<PilotRow> pilot_errors(const std::vector<spectral::CoefficientField>& coefs, const spectral::Expr& f,
                                   const std::optional<spectral::Expr>& exact, int p_lo, int p_hi);

// max L2 norm of Galerkin solutions of degree p over the coefficients
double max_solution_norm(const std::vector<spectral::CoefficientField>& coefs, const spectral::Expr& f, int p);

} // namespace pdeonet::onet
