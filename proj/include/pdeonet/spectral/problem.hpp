#pragma once

#include "pdeonet/spectral/coefficient.hpp"
#include "pdeonet/spectral/expr.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pdeonet::spectral {

// y-dependent coefficient a(y)(x) = sum_i a_i(y) psi_i(x) on a box of parameters
struct FamilySpec {
    std::vector<Expr> modes;        // psi_i(x)
    std::vector<Expr> coefficients; // a_i(y)
    std::vector<std::pair<double, double>> box;
    double a_min = 1.0;
};

struct ProblemSpec {
    std::string name;
    CoefficientField coefficient;
    std::optional<Expr> exact;   // manufactured solution, if known
    Expr source;
    int p = 4;
    int q = 5;
    std::optional<FamilySpec> family;
};

// Keys: dimension, kind ("scalar" | "reaction_diffusion"), a, a_min, a_max,
// A (d x d array of strings), c, c_min, c_max, u and/or f, p, q, family
// {modes, coefficients, box, a_min}. When only u is given, f is manufactured.
ProblemSpec problem_from_json(const nlohmann::json& doc);
ProblemSpec load_problem(const std::filesystem::path& file);

// The 1-D model problem: a = 1 + 0.5 sin(2 pi x), u = sin(2 pi x).
ProblemSpec model_problem(int d = 1);

} // namespace pdeonet::spectral
