#include "pdeonet/nn/errors.hpp"
#include "pdeonet/onet/branch.hpp"
#include "pdeonet/onet/family.hpp"
#include "pdeonet/onet/onet.hpp"
#include "pdeonet/onet/plan.hpp"
#include "pdeonet/spectral/galerkin.hpp"
#include "pdeonet/spectral/manufactured.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace pdeonet;
using namespace pdeonet::onet;
using namespace pdeonet::spectral;

namespace {

CoefficientField constant(double a)
{
    return CoefficientField::scalar(1, Expr(a), a, a);
}

CoefficientField model()
{
    return CoefficientField::scalar(1, Expr::parse("1 + 0.5*sin(2*pi*x1)"), 0.5, 1.5);
}

std::vector<double> samples(const CoefficientField& c, const QuadratureRule& q)
{
    std::vector<double> v;
    for (int k = 0; k < q.size(); ++k)
        v.push_back(c.value(q.node(k)));
    return v;
}

Eigen::MatrixXd matrix_out(const nn::Network& net, const std::vector<double>& in, int n)
{
    const auto out = net.realize(in);
    return matricize(out, n);
}

const Expr model_source = Expr::parse("8*pi*pi*sin(2*pi*x1)");

} // namespace

TEST(InputLayer, UnitCoefficientP3)
{
    const PeriodicBasis b(1, 3);
    const QuadratureRule q = gauss_lobatto(4, 1);
    const nn::Network net = input_layer_net(b, q, 1.0);
    Eigen::Matrix2d want;
    want << -12, 0, 0, -20;
    EXPECT_LE((matrix_out(net, samples(constant(1), q), 2) - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(matrix_out(net, std::vector<double>(q.size(), 0.0), 2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(InputLayer, MatchesAssembly)
{
    std::mt19937_64 rng(41);
    for (int d = 1; d <= 2; ++d) {
        const int p = d == 1 ? 6 : 3;
        const PeriodicBasis b(d, p);
        const QuadratureRule q = gauss_lobatto(p + 1, d);
        const double alpha = 0.4;
        const nn::Network net = input_layer_net(b, q, alpha);
        for (int t = 0; t < 5; ++t) {
            const CoefficientField a = random_trig_coefficient(d, rng);
            const Eigen::MatrixXd want = -alpha * stiffness_matrix(a, b, q);
            EXPECT_LE((matrix_out(net, samples(a, q), b.n_b()) - want).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(InputLayer, EncoderPermutationInvariance)
{
    std::mt19937_64 rng(42);
    const PeriodicBasis b(2, 3);
    const QuadratureRule q = gauss_lobatto(4, 2);
    const CoefficientField a = random_trig_coefficient(2, rng);
    const auto base = input_layer_net(b, q, 0.5).realize(samples(a, q));
    for (int t = 0; t < 5; ++t) {
        std::vector<int> perm(q.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        QuadratureRule pq = q;
        for (int k = 0; k < q.size(); ++k) {
            pq.nodes.col(k) = q.nodes.col(perm[k]);
            pq.weights(k) = q.weights(perm[k]);
        }
        const auto out = input_layer_net(b, pq, 0.5).realize(samples(a, pq));
        for (std::size_t i = 0; i < out.size(); ++i)
            EXPECT_NEAR(out[i], base[i], 1e-13);
    }
}

TEST(Preconditioned, UnitCoefficientGivesScaledIdentity)
{
    const PeriodicBasis b(1, 5);
    const QuadratureRule q = gauss_lobatto(6, 1);
    for (auto mode : {Preconditioning::left, Preconditioning::symmetric}) {
        const nn::Network net = preconditioned_input_net(b, q, 0.3, mode);
        const Eigen::MatrixXd m = matrix_out(net, samples(constant(1), q), b.n_b());
        EXPECT_LE((m - 0.7 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Preconditioned, ConsistentWithAssembly)
{
    std::mt19937_64 rng(43);
    const PeriodicBasis b(1, 6);
    const QuadratureRule q = gauss_lobatto(7, 1);
    const double alpha = 0.5;
    const nn::Network net = preconditioned_input_net(b, q, alpha, Preconditioning::left);
    for (int t = 0; t < 5; ++t) {
        const CoefficientField a = random_trig_coefficient(1, rng);
        const DiscreteSystem s = assemble(a, b, q, Expr(0.0));
        const Eigen::MatrixXd want = Eigen::MatrixXd::Identity(b.n_b(), b.n_b()) - alpha * s.preconditioned;
        EXPECT_LE((matrix_out(net, samples(a, q), b.n_b()) - want).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Preconditioned, NormGuard)
{
    // alpha = 1/(a_min + a_max); the symmetric form is normal and obeys the
    // bound for every sample, the left form is checked at low degree
    std::mt19937_64 rng(44);
    const double alpha = 0.5, bound = 1 - alpha * 0.5 + 1e-10;
    for (int p = 3; p <= 8; ++p) {
        const PeriodicBasis b(1, p);
        const QuadratureRule q = gauss_lobatto(p + 1, 1);
        const nn::Network sym = preconditioned_input_net(b, q, alpha, Preconditioning::symmetric);
        std::vector<CoefficientField> coefs{model()};
        for (int t = 0; t < 10; ++t)
            coefs.push_back(random_trig_coefficient(1, rng));
        for (const auto& a : coefs)
            EXPECT_LE(matrix_out(sym, samples(a, q), b.n_b()).operatorNorm(), bound) << p;
    }
    const PeriodicBasis b(1, 4);
    const QuadratureRule q = gauss_lobatto(5, 1);
    const nn::Network left = preconditioned_input_net(b, q, alpha, Preconditioning::left);
    EXPECT_LE(matrix_out(left, samples(model(), q), b.n_b()).operatorNorm(), bound);
}

TEST(BranchInversion, UnitCoefficient)
{
    const PeriodicBasis b(1, 4);
    const QuadratureRule q = gauss_lobatto(5, 1);
    const double eps = 1e-2;
    const nn::Network net = branch_inversion_net(b, q, eps, ClassBounds::of(model()));
    const Eigen::MatrixXd m = matrix_out(net, samples(constant(1), q), 3);
    EXPECT_LE((m - Eigen::MatrixXd::Identity(3, 3)).operatorNorm(), eps);
}

TEST(BranchInversion, ModelCoefficientBothModes)
{
    const PeriodicBasis b(1, 4);
    const QuadratureRule q = gauss_lobatto(5, 1);
    const double eps = 1e-2;
    const ClassBounds cb = ClassBounds::of(model());
    const Eigen::MatrixXd exact = assemble(model(), b, q, Expr(0.0)).preconditioned.inverse();
    for (auto mode : {Preconditioning::left, Preconditioning::symmetric}) {
        BranchInfo info;
        const nn::Network net = branch_inversion_net(b, q, eps, cb, &info, mode);
        const Eigen::MatrixXd m = matrix_out(net, samples(model(), q), 3);
        EXPECT_LE((m - exact).operatorNorm(), eps);
        EXPECT_LE(m.operatorNorm(), eps + 1 / cb.delta());
        EXPECT_DOUBLE_EQ(info.alpha, 0.5);
    }
    EXPECT_THROW(branch_inversion_net(b, q, 1.0, cb), PreconditionError);
}

TEST(BranchCoeff, UnitCoefficientP3)
{
    const PeriodicBasis b(1, 3);
    const QuadratureRule q = gauss_lobatto(4, 1);
    const double eps_u = 1e-4;
    const ClassBounds cb = ClassBounds::of(model());
    const Eigen::Vector2d cf(0.2, 0.0);
    const auto out = branch_coeff_net(b, q, cf, eps_u, cb).realize(samples(constant(1), q));
    EXPECT_NEAR(out[0], 1.0 / 60, eps_u);
    EXPECT_NEAR(out[1], 0.0, eps_u);
    const auto zero = branch_coeff_net(b, q, Expr(0.0), eps_u, cb).realize(samples(model(), q));
    for (double v : zero)
        EXPECT_LE(std::abs(v), eps_u);
}

TEST(BranchCoeff, RandomFamily)
{
    std::mt19937_64 rng(45);
    const PeriodicBasis b(1, 5);
    const QuadratureRule q = gauss_lobatto(6, 1);
    const double eps_u = 1e-3;
    const nn::Network net = branch_coeff_net(b, q, model_source, eps_u, ClassBounds::of(model()));
    for (int t = 0; t < 20; ++t) {
        const CoefficientField a = random_trig_coefficient(1, rng);
        const Eigen::VectorXd c_f = load_vector(b, model_source, q.q + 4);
        const Eigen::VectorXd want = spd_solve(stiffness_matrix(a, b, q), c_f);
        const auto out = net.realize(samples(a, q));
        EXPECT_LE((Eigen::Map<const Eigen::VectorXd>(out.data(), want.size()) - want).norm(), eps_u);
    }
}

TEST(Family, DrawsRespectDeclaredBounds)
{
    std::mt19937_64 rng(46);
    for (int d = 1; d <= 2; ++d)
        for (int t = 0; t < 10; ++t) {
            EXPECT_NO_THROW(random_trig_coefficient(d, rng).validate(gauss_lobatto(9, d)));
            EXPECT_NO_THROW(random_rd_coefficient(d, rng).validate(gauss_lobatto(9, d)));
        }
}

TEST(Plan, BudgetsAndMonotoneDegree)
{
    Calibration cal;
    cal.C_G = 15.0;
    cal.b_G = 0.42;
    const ClassBounds cb{0.5, 1.5};
    int prev = 0;
    for (double eps : {0.5, 0.2, 0.1, 0.05, 0.01, 0.005, 0.001}) {
        const BuildPlan plan = make_plan(eps, 1, cb, cal, 0.8);
        EXPECT_DOUBLE_EQ(plan.eps_G, eps / 3);
        EXPECT_LT(plan.alpha * cb.continuity, 1.0);
        EXPECT_GT(plan.eps_u, 0.0);
        EXPECT_LT(plan.eps_u, 1.0);
        EXPECT_GT(plan.eps_b, 0.0);
        EXPECT_LT(plan.eps_b, 1.0);
        EXPECT_GE(plan.q, plan.p + 1);
        EXPECT_GE(plan.p, prev);
        prev = plan.p;
        const BuildPlan back = plan_from_json(to_json(plan));
        EXPECT_EQ(back.p, plan.p);
        EXPECT_EQ(back.eps_u, plan.eps_u);
    }
    EXPECT_GE(plan_degree(1.0, cal), 2);
}

TEST(Plan, FitRejectsDegenerateData)
{
    EXPECT_THROW(fit_calibration({{4, 0.1}}), PlanError);
    EXPECT_THROW(fit_calibration({{4, 0.1}, {5, 0.2}}), PlanError);
    const Calibration c = fit_calibration({{4, 1.0}, {5, 0.5}, {6, 0.3}});
    EXPECT_TRUE(c.valid());
    // envelope: the fitted curve lies above every pilot point
    for (auto [p, e] : std::vector<std::pair<int, double>>{{4, 1.0}, {5, 0.5}, {6, 0.3}})
        EXPECT_GE(c.C_G * std::exp(-c.b_G * p), e * (1 - 1e-12));
}

TEST(Onet, ExplicitBuildAgainstGalerkin)
{
    ProblemSpec pb = model_problem(1);
    const OperatorNet net = build_onet(pb, ExplicitBuild{4, 5, 1e-3, 1e-3});
    EXPECT_EQ(net.branch.output_dim(), net.trunk.output_dim());
    EXPECT_EQ(net.report.n_q, 5);
    std::mt19937_64 rng(47);
    const QuadratureRule rule = network_error_rule(1);
    std::vector<CoefficientField> coefs{pb.coefficient};
    for (int t = 0; t < 9; ++t)
        coefs.push_back(random_trig_coefficient(1, rng));
    for (const auto& a : coefs) {
        const SolutionField g = galerkin_solve(a, pb.source, 4, 5);
        EXPECT_LE(error_norms(g, eval_field(net, a), rule).h1, 5e-2);
    }
}

TEST(Onet, UnitCoefficientMatchesGalerkin)
{
    ProblemSpec pb = model_problem(1);
    pb.coefficient = CoefficientField::scalar(1, Expr(1.0), 0.5, 1.5);
    const OperatorNet net = build_onet(pb, ExplicitBuild{6, 7, 1e-4, 1e-4});
    const SolutionField g = galerkin_solve(pb.coefficient, pb.source, 6, 7);
    EXPECT_LE(error_norms(g, eval_field(net, pb.coefficient), network_error_rule(1)).h1, 1e-2);
}

TEST(Onet, FieldIsLinearInBranchVector)
{
    const OperatorNet net = build_onet(model_problem(1), ExplicitBuild{4, 5, 1e-2, 1e-2});
    const Eigen::VectorXd c = net.branch_vector(model());
    const OnetField f(net.trunk, c), f2(net.trunk, 2 * c), z(net.trunk, Eigen::VectorXd::Zero(c.size()));
    for (double x : {0.1, 0.45, 0.77}) {
        const std::vector<double> pt{x};
        EXPECT_NEAR(f2(pt), 2 * f(pt), 1e-14);
        EXPECT_EQ(z(pt), 0.0);
        EXPECT_NEAR(eval_onet(net, model(), pt), f(pt), 1e-14);
    }
}

TEST(Onet, BundleRoundTrip)
{
    const OperatorNet net = build_onet(model_problem(1), ExplicitBuild{4, 5, 1e-2, 1e-2});
    const auto dir = std::filesystem::temp_directory_path() / "pdeonet_bundle_test";
    std::filesystem::remove_all(dir);
    save_bundle(net, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "branch.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "trunk.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "meta.json"));
    const OperatorNet back = load_bundle(dir);
    EXPECT_EQ(back.report.branch_size, net.report.branch_size);
    EXPECT_EQ(back.encoder.rule.size(), net.encoder.rule.size());
    const auto a = net.branch_vector(model()), b = back.branch_vector(model());
    EXPECT_EQ(a, b);
    std::filesystem::remove_all(dir);
}

TEST(Onet, RequiresQuadratureAboveDegree)
{
    EXPECT_THROW(build_onet(model_problem(1), ExplicitBuild{4, 4, 1e-2, 1e-2}), PreconditionError);
}

TEST(ReactionDiffusion, InputLayerIsH1Gram)
{
    const int p = 4;
    const PeriodicBasis b(1, p, true);
    const QuadratureRule q = gauss_lobatto(p + 1, 1);
    const double alpha = 0.25;
    const nn::Network net = input_layer_net(b, q, alpha);
    // A = Id, c = 1
    std::vector<double> in(q.size(), 1.0);
    in.insert(in.end(), q.size(), 1.0);
    ASSERT_EQ(static_cast<int>(in.size()), net.input_dim());
    const Eigen::MatrixXd m = matrix_out(net, in, b.size());
    const Eigen::MatrixXd gram = reference_matrix(PeriodicBasis(1, p), q);
    const Eigen::MatrixXd mass = mass_matrix(b, q);
    Eigen::MatrixXd want = -alpha * mass;
    want.topLeftCorner(b.n_b(), b.n_b()) -= alpha * gram;
    EXPECT_LE((m - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(mass(b.n_b(), b.n_b()), 1.0, 1e-14);
    // input layer size bound (d^2 + 1) n~_b^2 n_q
    EXPECT_LE(net.size(), static_cast<std::size_t>(2 * b.size() * b.size() * q.size()));
}

TEST(ReactionDiffusion, NoReactionMatchesScalarBlock)
{
    const int p = 5;
    const PeriodicBasis rb(1, p, true), sb(1, p);
    const QuadratureRule q = gauss_lobatto(p + 1, 1);
    const CoefficientField a = model();
    std::vector<double> in = samples(a, q);
    in.insert(in.end(), q.size(), 0.0);
    const Eigen::MatrixXd m = matrix_out(input_layer_net(rb, q, 1.0), in, rb.size());
    const Eigen::MatrixXd s = matrix_out(input_layer_net(sb, q, 1.0), samples(a, q), sb.n_b());
    EXPECT_LE((m.topLeftCorner(sb.n_b(), sb.n_b()) - s).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ReactionDiffusion, EncoderRejectsAsymmetricMatrix)
{
    const Encoder e = make_encoder(EncoderKind::reaction_diffusion, 2, 3);
    const CoefficientField bad = CoefficientField::reaction_diffusion(
        2, {Expr(1.0), Expr(0.1), Expr(0.0), Expr(1.0)}, Expr(1.0), 0.5, 1.5, 0.5, 1.5);
    EXPECT_THROW(e.encode(bad), PreconditionError);
}

TEST(Parametric, ModeMatrixAndReduction)
{
    FamilySpec spec;
    spec.modes = {Expr(1.0), Expr::parse("cos(2*pi*x1)")};
    spec.coefficients = {Expr(2.0), Expr::parse("y1")};
    spec.box = {{-1.0, 1.0}};
    spec.a_min = 1.0;
    const ParametricFamily fam = ParametricFamily::from_spec(spec, 1);
    const QuadratureRule q = gauss_lobatto(6, 1);
    const Eigen::MatrixXd V = mode_matrix(fam, q, 2);
    for (int k = 0; k < q.size(); ++k) {
        EXPECT_EQ(V(k, 0), 1.0);
        EXPECT_NEAR(V(k, 1), std::cos(2 * std::numbers::pi * q.node(k)[0]), 1e-14);
    }
    const std::vector<double> y0{0.0};
    const CoefficientField a0 = fam.at(y0);
    for (double x : {0.0, 0.3, 0.8})
        EXPECT_EQ(a0.value(std::vector<double>{x}), 2.0);
    EXPECT_EQ(parameter_grid(fam, 21).size(), 21u);
}

TEST(Onet, PlannedBuildBudgets)
{
    const ProblemSpec pb = model_problem(1);
    std::vector<CoefficientField> pilot{pb.coefficient};
    const Calibration cal = fit_calibration(pilot_errors(pilot, pb.source, pb.exact, 4, 16));
    const double eps = 0.1;
    const BuildPlan plan = make_plan(eps, 1, ClassBounds::of(pb.coefficient), cal, max_solution_norm(pilot, pb.source, 16));
    const OperatorNet net = build_onet(pb, plan);
    const OnetField u = eval_field(net, pb.coefficient);
    const QuadratureRule rule = network_error_rule(1);
    const SolutionField g = galerkin_solve(pb.coefficient, pb.source, plan.p, plan.q);
    EXPECT_LE(error_norms(g, u, rule).h1, 2 * eps / 3);
    EXPECT_LE(error_norms(ExprField(1, *pb.exact), u, rule).h1, eps);
    EXPECT_EQ(net.report.n_q, plan.n_q);
}
