#include "pdeonet/experiments/studies.hpp"

#include "pdeonet/nn/calculus.hpp"
#include "pdeonet/nn/errors.hpp"
#include "pdeonet/onet/family.hpp"
#include "pdeonet/spectral/galerkin.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pdeonet::experiments {

using spectral::CoefficientField;
using spectral::CoefficientKind;
using spectral::ProblemSpec;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// FNV-1a, stable across platforms unlike std::hash
std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

int default_p_hi(int d)
{
    return d == 1 ? 16 : d == 2 ? 8 : 5;
}

} // namespace

std::mt19937_64 study_stream(std::uint64_t seed, const std::string& study)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(fnv1a(study)), static_cast<std::uint32_t>(fnv1a(study) >> 32)};
    return std::mt19937_64(seq);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
        throw ShapeError("fit_line: x and y lengths differ");
    if (x.size() < 2)
        throw PreconditionError("fit needs at least two points; got " + std::to_string(x.size()) +
                                " (a single degree cannot determine a rate)");
    Eigen::MatrixXd X(x.size(), 2);
    Eigen::VectorXd Y(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = x[i];
        Y(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Eigen::Vector2d c = X.colPivHouseholderQr().solve(Y);
    LineFit f;
    f.intercept = c(0);
    f.slope = c(1);
    f.residual = (Y - X * c).cwiseAbs().maxCoeff();
    f.range = Y.maxCoeff() - Y.minCoeff();
    return f;
}

StudyReport convergence_study(const ProblemSpec& problem, int p_lo, int p_hi, int q_offset)
{
    if (!problem.exact)
        throw PreconditionError("convergence study needs a manufactured solution u");
    if (p_hi < p_lo || p_lo < 2)
        throw PreconditionError("convergence study needs 2 <= p_lo <= p_hi");
    if (q_offset < 1)
        throw PreconditionError("convergence study needs q >= p+1");
    StudyReport r;
    r.kind = "convergence";
    r.grid = {{"problem", problem.name}, {"p_lo", p_lo}, {"p_hi", p_hi}, {"q", "p+" + std::to_string(q_offset)}};
    r.columns = {"p", "q", "n_b", "n_q", "l2_error", "h1_error", "lambda_min", "lambda_max"};
    r.x_column = "p";
    r.series = {"l2_error", "h1_error"};
    const CoefficientField& coef = problem.coefficient;
    const int d = coef.d;
    const spectral::ExprField u(d, *problem.exact);
    const auto t0 = std::chrono::steady_clock::now();
    for (int p = p_lo; p <= p_hi; ++p) {
        const int q = p + q_offset;
        try {
            const spectral::PeriodicBasis basis(d, p, coef.kind == CoefficientKind::reaction_diffusion);
            const spectral::QuadratureRule quad = spectral::gauss_lobatto(q, d);
            const spectral::DiscreteSystem sys = spectral::assemble(coef, basis, quad, problem.source);
            const spectral::ErrorNorms e = spectral::error_norms(u, spectral::SolutionField(basis, sys.solution));
            const spectral::SpectrumBounds sb = spectral::spectrum_bounds(sys);
            r.add_row({double(p), double(q), double(basis.size()), double(quad.size()), e.l2, e.h1, sb.lambda_min,
                       sb.lambda_max});
        } catch (const std::exception& ex) {
            r.failures.push_back("p=" + std::to_string(p) + ": " + ex.what());
        }
    }
    r.timings["total"] = seconds_since(t0);
    const std::vector<double> ps = r.values("p");
    std::vector<double> logs;
    for (double e : r.values("h1_error"))
        logs.push_back(std::log(e));
    int increases = 0;
    for (std::size_t i = 1; i < logs.size(); ++i)
        if (!(logs[i] < logs[i - 1]))
            ++increases;
    r.fits["increases"] = increases;
    r.fits["monotone"] = increases == 0 ? 1.0 : 0.0;
    if (logs.size() >= 2 && !(logs.back() < logs.front()))
        r.failures.push_back("H1 error does not decrease across the range");
    const LineFit f = fit_line(ps, logs);
    r.fits["slope"] = f.slope;
    r.fits["intercept"] = f.intercept;
    r.fits["residual"] = f.residual;
    r.fits["range"] = f.range;
    r.fits["residual_fraction"] = f.range > 0.0 ? f.residual / f.range : 0.0;
    r.fits["b_G"] = -f.slope;
    if (!(f.slope < 0.0))
        r.failures.push_back("fitted slope is not negative");
    else if (r.fits["residual_fraction"] > 0.2)
        r.failures.push_back("fit residual exceeds 20% of the data range");
    return r;
}

std::vector<CoefficientField> test_family(const ProblemSpec& problem, int draws, std::uint64_t seed)
{
    const CoefficientField& c = problem.coefficient;
    std::mt19937_64 rng = study_stream(seed, "test-family");
    std::vector<CoefficientField> out;
    const double center = 0.5 * (c.a_min + c.a_max);
    const double amp = (c.a_max - c.a_min) / (c.a_max + c.a_min);
    for (int i = 0; i < draws; ++i) {
        if (c.kind == CoefficientKind::scalar) {
            CoefficientField a = onet::random_trig_coefficient(c.d, rng, amp);
            out.push_back(CoefficientField::scalar(c.d, spectral::Expr(center) * a.a, c.a_min, c.a_max));
        } else {
            const double c_center = 0.5 * (c.c_min + c.c_max);
            const double c_amp = (c.c_max - c.c_min) / (c.c_max + c.c_min);
            CoefficientField a = onet::random_rd_coefficient(c.d, rng, amp, c_amp);
            for (auto& e : a.A)
                e = spectral::Expr(center) * e;
            a.c = spectral::Expr(c_center) * a.c;
            a.a_min = c.a_min;
            a.a_max = c.a_max;
            a.c_min = c.c_min;
            a.c_max = c.c_max;
            out.push_back(std::move(a));
        }
    }
    return out;
}

CalibrationResult calibrate(const ProblemSpec& problem, const CalibrationOptions& options)
{
    const int d = problem.coefficient.d;
    const int p_hi = options.p_hi > 0 ? options.p_hi : default_p_hi(d);
    CalibrationResult out;
    out.pilot.push_back(problem.coefficient);
    std::vector<onet::PilotRow> rows = onet::pilot_errors(out.pilot, problem.source, problem.exact, options.p_lo, p_hi);
    if (options.family_draws > 0) {
        std::vector<CoefficientField> draws = test_family(problem, options.family_draws, options.seed ^ 0x9e3779b97f4a7c15ull);
        const auto extra = onet::pilot_errors(draws, problem.source, std::nullopt, options.p_lo, p_hi);
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i].error = std::max(rows[i].error, extra[i].error);
        out.pilot.insert(out.pilot.end(), draws.begin(), draws.end());
    }
    StudyReport& r = out.report;
    r.kind = "calibration";
    r.seed = options.seed;
    r.grid = {{"problem", problem.name}, {"p_lo", options.p_lo}, {"p_hi", p_hi}, {"family_draws", options.family_draws}};
    r.columns = {"p", "sup_h1_error"};
    r.x_column = "p";
    r.series = {"sup_h1_error"};
    for (const auto& row : rows)
        r.add_row({double(row.p), row.error});
    out.calibration = onet::fit_calibration(rows);
    out.sup_u = onet::max_solution_norm(out.pilot, problem.source, p_hi);
    r.fits["C_G"] = out.calibration.C_G;
    r.fits["b_G"] = out.calibration.b_G;
    r.fits["fit_intercept"] = out.calibration.fit_intercept;
    r.fits["fit_residual"] = out.calibration.fit_residual;
    r.fits["sup_u"] = out.sup_u;
    return out;
}

StudyReport invnet_study(const std::vector<int>& Ns, const std::vector<double>& eps_range,
                         const std::vector<double>& deltas, int samples, std::uint64_t seed)
{
    StudyReport r;
    r.kind = "invnet";
    r.seed = seed;
    r.grid = {{"N", Ns}, {"eps", eps_range}, {"delta", deltas}, {"samples", samples}};
    r.columns = {"N", "delta", "eps", "size", "depth", "max_error", "max_output_norm", "pass"};
    r.x_column = "eps";
    r.series = {"max_error"};
    std::mt19937_64 rng = study_stream(seed, "invnet");
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    for (int N : Ns)
        for (double delta : deltas)
            for (double eps : eps_range) {
                try {
                    const nn::Network net = nn::inversion_net(N, {eps, 1.0, delta});
                    double max_err = 0.0, max_norm = 0.0;
                    for (int s = 0; s < samples; ++s) {
                        Eigen::MatrixXd A(N, N);
                        for (int k = 0; k < N * N; ++k)
                            A.data()[k] = gauss(rng);
                        if (s % 2 == 1)
                            A = 0.5 * (A + A.transpose()).eval();
                        // norms concentrated near the admissible limit 1 - delta
                        const double target = (1.0 - delta) * std::pow(unit(rng), 0.25);
                        const double n2 = A.operatorNorm();
                        if (n2 > 0.0)
                            A *= target / n2;
                        const std::vector<double> out =
                            net.realize(std::span<const double>(A.data(), static_cast<std::size_t>(N * N)));
                        const Eigen::Map<const Eigen::MatrixXd> P(out.data(), N, N);
                        const Eigen::MatrixXd exact = (Eigen::MatrixXd::Identity(N, N) - A).inverse();
                        max_err = std::max(max_err, (exact - P).operatorNorm());
                        max_norm = std::max(max_norm, Eigen::MatrixXd(P).operatorNorm());
                    }
                    const bool pass = max_err <= eps && max_norm <= eps + 1.0 / delta;
                    r.add_row({double(N), delta, eps, double(net.size()), double(net.depth()), max_err, max_norm,
                               pass ? 1.0 : 0.0});
                    if (!pass)
                        r.failures.push_back("N=" + std::to_string(N) + " delta=" + std::to_string(delta) +
                                             " eps=" + std::to_string(eps) + " exceeds its bound");
                } catch (const std::exception& ex) {
                    r.failures.push_back("N=" + std::to_string(N) + " build failed: " + ex.what());
                }
            }
    r.timings["total"] = seconds_since(t0);
    return r;
}

StudyReport size_scaling_study(const ProblemSpec& problem, const std::vector<double>& eps_range,
                               const OnetStudyOptions& options)
{
    const int d = problem.coefficient.d;
    StudyReport r;
    r.kind = "size";
    r.seed = options.seed;
    r.grid = {{"problem", problem.name}, {"eps", eps_range}, {"test_draws", options.test_draws}, {"d", d}};
    r.columns = {"eps",        "log_log_eps", "p",        "n_b",          "n_q",          "eps_u",
                 "eps_b",      "branch_size", "branch_depth", "trunk_size", "trunk_depth", "h1_error"};
    r.x_column = "log_log_eps";
    r.series = {"branch_size", "trunk_size", "h1_error"};

    CalibrationOptions copt;
    copt.seed = options.seed;
    const CalibrationResult cal = calibrate(problem, copt);
    r.fits["C_G"] = cal.calibration.C_G;
    r.fits["b_G"] = cal.calibration.b_G;
    r.fits["sup_u"] = cal.sup_u;

    std::vector<CoefficientField> tests;
    std::vector<spectral::SolutionField> refs;
    if (options.measure_error) {
        tests = test_family(problem, options.test_draws, options.seed);
        for (const auto& c : tests)
            refs.push_back(onet::reference_solution(c, problem.source));
    }
    const spectral::QuadratureRule rule = spectral::network_error_rule(d);
    const onet::ClassBounds bounds = onet::ClassBounds::of(problem.coefficient);
    const bool rd = problem.coefficient.kind == CoefficientKind::reaction_diffusion;
    for (double eps : eps_range) {
        try {
            const onet::BuildPlan plan = onet::make_plan(eps, d, bounds, cal.calibration, cal.sup_u, rd);
            auto t0 = std::chrono::steady_clock::now();
            const onet::OperatorNet net = onet::build_onet(problem, plan);
            const double build = seconds_since(t0);
            t0 = std::chrono::steady_clock::now();
            double err = 0.0;
            for (std::size_t i = 0; i < tests.size(); ++i)
                err = std::max(err, spectral::error_norms(refs[i], onet::eval_field(net, tests[i]), rule).h1);
            const double eval = seconds_since(t0);
            const auto& rep = net.report;
            r.add_row({eps, std::log(std::abs(std::log(eps))), double(plan.p), double(rep.n_b), double(rep.n_q),
                       plan.eps_u, plan.eps_b, double(rep.branch_size), double(rep.branch_depth),
                       double(rep.trunk_size), double(rep.trunk_depth), err});
            std::ostringstream key;
            key << eps;
            r.timings["build@" + key.str()] = build;
            r.timings["eval@" + key.str()] = eval;
            if (options.measure_error && err > eps)
                r.failures.push_back("eps=" + std::to_string(eps) + ": sup H1 error " + std::to_string(err));
        } catch (const std::exception& ex) {
            r.failures.push_back("eps=" + std::to_string(eps) + ": " + ex.what());
        }
    }
    if (r.rows.size() >= 2) {
        const std::vector<double> x = r.values("log_log_eps");
        std::vector<double> lb, lt;
        for (double s : r.values("branch_size"))
            lb.push_back(std::log(s));
        for (double s : r.values("trunk_size"))
            lt.push_back(std::log(s));
        const LineFit fb = fit_line(x, lb), ft = fit_line(x, lt);
        r.fits["branch_slope"] = fb.slope;
        r.fits["branch_slope_limit"] = 3.0 * d + 2.0 + 0.5;
        r.fits["trunk_slope"] = ft.slope;
        r.fits["trunk_slope_limit"] = d + 1.0 + 0.5;
        if (fb.slope > 3.0 * d + 2.5)
            r.failures.push_back("branch size slope " + std::to_string(fb.slope) + " above the limit");
        if (ft.slope > d + 1.5)
            r.failures.push_back("trunk size slope " + std::to_string(ft.slope) + " above the limit");
    }
    return r;
}

StudyReport lipschitz_study(const ProblemSpec& problem, const std::vector<double>& scales, int p)
{
    const CoefficientField& coef = problem.coefficient;
    if (coef.kind != CoefficientKind::scalar)
        throw PreconditionError("lipschitz study perturbs scalar coefficients");
    const int d = coef.d;
    if (p <= 0)
        p = d == 1 ? 12 : 6;
    StudyReport r;
    r.kind = "lipschitz";
    r.grid = {{"problem", problem.name}, {"p", p}, {"scales", scales}};
    r.columns = {"scale", "ratio_cos", "ratio_sin"};
    r.x_column = "scale";
    r.series = {"ratio_cos", "ratio_sin"};
    const spectral::SolutionField u = spectral::galerkin_solve(coef, problem.source, p, p + 1);
    const spectral::Expr phase = spectral::Expr(2.0 * std::numbers::pi) * spectral::Expr::x(0);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double s : scales) {
        if (!(s > 0.0) || s >= coef.a_min)
            throw PreconditionError("perturbation scale must lie in (0, a_min)");
        std::vector<double> row{s};
        for (const spectral::Expr& psi : {cos(phase), sin(phase)}) {
            CoefficientField pert = coef;
            pert.a = coef.a + spectral::Expr(s) * psi;
            pert.a_min = coef.a_min - s;
            pert.a_max = coef.a_max + s;
            const spectral::SolutionField v = spectral::galerkin_solve(pert, problem.source, p, p + 1);
            const double ratio = spectral::error_norms(v, u).h1 / s;
            row.push_back(ratio);
        }
        // spread per perturbation direction
        r.add_row(row);
    }
    double spread = 1.0;
    for (const std::string col : {"ratio_cos", "ratio_sin"}) {
        const std::vector<double> v = r.values(col);
        lo = *std::min_element(v.begin(), v.end());
        hi = *std::max_element(v.begin(), v.end());
        if (lo > 0.0)
            spread = std::max(spread, hi / lo);
        r.fits["max_" + col] = hi;
    }
    r.fits["spread"] = spread;
    if (spread > 2.0)
        r.failures.push_back("ratio spread " + std::to_string(spread) + " above 2");
    return r;
}

StudyReport parametric_study(const onet::ParametricFamily& family, const spectral::Expr& f, double epsilon,
                             int grid_points)
{
    StudyReport r;
    r.kind = "parametric";
    r.grid = {{"epsilon", epsilon}, {"grid_points", grid_points}, {"d_p", family.d_p()}};
    for (int m = 1; m <= family.d_p(); ++m)
        r.columns.push_back("y" + std::to_string(m));
    r.columns.push_back("h1_error");
    r.x_column = "y1";
    r.series = {"h1_error"};
    const onet::OperatorNet net = onet::build_parametric_onet(family, f, epsilon);
    const spectral::QuadratureRule rule = spectral::network_error_rule(family.d);
    const double upper = net.report.extra.value("inner_continuity", 0.0);
    double sup = 0.0;
    for (const auto& y : onet::parameter_grid(family, grid_points)) {
        const CoefficientField a = family.at(y, -1, family.a_min, std::max(upper, family.a_min));
        const spectral::SolutionField ref = onet::reference_solution(a, f);
        const double e = spectral::error_norms(ref, onet::eval_field(net, y), rule).h1;
        std::vector<double> row(y.begin(), y.end());
        row.push_back(e);
        r.add_row(row);
        sup = std::max(sup, e);
    }
    const double guard = net.report.extra.value("truncation_min", 0.0);
    r.fits["sup_h1_error"] = sup;
    r.fits["truncation_min"] = guard;
    r.fits["n_p"] = net.report.extra.value("n_p", 0);
    r.fits["lipschitz"] = net.report.extra.value("lipschitz", 0.0);
    r.fits["branch_size"] = double(net.report.branch_size);
    r.fits["trunk_size"] = double(net.report.trunk_size);
    r.fits["p"] = net.report.p;
    if (sup > epsilon)
        r.failures.push_back("sup H1 error " + std::to_string(sup) + " above " + std::to_string(epsilon));
    if (guard < 0.5 * family.a_min)
        r.failures.push_back("truncated coefficient falls below a_min/2");
    return r;
}

} // namespace pdeonet::experiments
