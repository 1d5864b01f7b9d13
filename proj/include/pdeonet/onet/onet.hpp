#pragma once

#include "pdeonet/nn/calculus.hpp"
#include "pdeonet/nn/network.hpp"
#include "pdeonet/onet/branch.hpp"
#include "pdeonet/onet/plan.hpp"
#include "pdeonet/spectral/field.hpp"
#include "pdeonet/spectral/problem.hpp"
#include "pdeonet/spectral/quadrature.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace pdeonet::onet {

enum class EncoderKind { scalar, reaction_diffusion, parametric };

// Point evaluation at the Gauss-Lobatto nodes of the assembly rule, or the
// identity on the parameter vector.
struct Encoder {
    EncoderKind kind = EncoderKind::scalar;
    spectral::QuadratureRule rule;
    int parameter_dim = 0;

    int input_dim() const;
    std::vector<double> encode(const spectral::CoefficientField& coef) const;
};

Encoder make_encoder(EncoderKind kind, int d, int q, int parameter_dim = 0);

struct BuildReport {
    int p = 0, q = 0, n_b = 0, n_q = 0;
    std::size_t branch_size = 0, trunk_size = 0;
    int branch_depth = 0, trunk_depth = 0;
    double eps_inv = 0.0, eps_u = 0.0, eps_b = 0.0;
    std::optional<BuildPlan> plan;
    BranchInfo branch;
    nn::PolyBasisInfo trunk;
    double n_q_constant = 0.0; // n_q / (1 + |log eps|^d) when a target is known
    double build_seconds = 0.0;
    nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json to_json(const BuildReport& r);

struct OperatorNet {
    Encoder encoder;
    nn::Network branch;
    nn::Network trunk;
    BuildReport report;

    Eigen::VectorXd branch_vector(const spectral::CoefficientField& coef) const;
    Eigen::VectorXd branch_vector(std::span<const double> parameters) const;
};

// u(x) = c . trunk(x) with gradient trunk'(x)^T c
class OnetField : public spectral::Field {
public:
    OnetField(nn::Network trunk, Eigen::VectorXd coefficients);
    int dim() const override { return trunk_.input_dim(); }
    double eval(std::span<const double> x, std::span<double> grad) const override;
    const Eigen::VectorXd& coefficients() const { return c_; }

private:
    nn::Network trunk_;
    Eigen::VectorXd c_;
};

struct ExplicitBuild {
    int p = 4;
    int q = 5;
    double eps_inv = 1e-3;
    double eps_b = 1e-3;
};

// Scalar diffusion or reaction-diffusion, chosen by the coefficient kind.
// Class bounds are the declared bounds of problem.coefficient.
OperatorNet build_onet(const spectral::ProblemSpec& problem, const BuildPlan& plan);
OperatorNet build_onet(const spectral::ProblemSpec& problem, const ExplicitBuild& params);

// Reaction-diffusion only; rejects scalar coefficients.
OperatorNet build_rd_onet(const spectral::ProblemSpec& problem, const BuildPlan& plan);
OperatorNet build_rd_onet(const spectral::ProblemSpec& problem, const ExplicitBuild& params);

double eval_onet(const OperatorNet& onet, const spectral::CoefficientField& coef, std::span<const double> x);
OnetField eval_field(const OperatorNet& onet, const spectral::CoefficientField& coef);
OnetField eval_field(const OperatorNet& onet, std::span<const double> parameters);

// Appends a constant-one output to a trunk network.
nn::Network with_constant_output(const nn::Network& trunk);

// ---- parametric coefficients a(y)(x) = sum_i a_i(y) psi_i(x)

struct ParametricFamily {
    int d = 1;
    std::vector<spectral::Expr> modes;        // psi_i
    std::vector<spectral::Expr> coefficients; // a_i(y)
    std::vector<std::pair<double, double>> box;
    double a_min = 1.0;

    int d_p() const { return static_cast<int>(box.size()); }
    int terms() const { return static_cast<int>(modes.size()); }
    // a(y) truncated to the first n terms (all when n < 0), declared bounds
    // [lower, upper]
    spectral::CoefficientField at(std::span<const double> y, int n = -1, double lower = 0.0,
                                  double upper = 0.0) const;
    double truncated_value(std::span<const double> y, std::span<const double> x, int n) const;

    static ParametricFamily from_spec(const spectral::FamilySpec& spec, int d);
};

// y points: uniform grid of `per_axis` points per parameter axis
std::vector<std::vector<double>> parameter_grid(const ParametricFamily& fam, int per_axis);

struct ParametricOptions {
    int pilot_points = 9;   // per parameter axis
    int grid_points = 21;   // per parameter axis, for tails and guards
    int pilot_p_max = 0;    // 0: 16 in 1-D, 8 in 2-D
};

// max ||u^{a+eta} - u^a||_H1 / ||eta||_inf over the coefficients, eta = s psi
// for s in scales and psi in {cos, sin}(2 pi x_1)
double measured_lipschitz(const std::vector<spectral::CoefficientField>& coefs, const spectral::Expr& f, int p,
                          const std::vector<double>& scales);

// The branch reads y; the inner branch is fed an emulated coefficient at the
// encoder nodes through V (n_q x n_p, V_ik = psi_k(x_i)).
OperatorNet build_parametric_onet(const ParametricFamily& family, const spectral::Expr& f, double epsilon,
                                  const ParametricOptions& options = {});

// V_ik = psi_k(x_i)
Eigen::MatrixXd mode_matrix(const ParametricFamily& family, const spectral::QuadratureRule& rule, int n_p);

// ---- bundle directory: branch.json, trunk.json, meta.json

void save_bundle(const OperatorNet& onet, const std::filesystem::path& dir);
OperatorNet load_bundle(const std::filesystem::path& dir);

} // namespace pdeonet::onet
