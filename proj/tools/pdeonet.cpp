#include "pdeonet/experiments/report.hpp"
#include "pdeonet/experiments/studies.hpp"
#include "pdeonet/nn/errors.hpp"
#include "pdeonet/onet/onet.hpp"
#include "pdeonet/onet/plan.hpp"
#include "pdeonet/spectral/galerkin.hpp"
#include "pdeonet/spectral/problem.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace pdeonet;
using experiments::StudyReport;

namespace {

// exit codes
constexpr int ok_code = 0;
constexpr int argument_code = 2;
constexpr int failure_code = 3;

struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string problem;
    int p = 0;
    int q = 0;
    int p_max = 0;
    std::vector<double> eps;
    std::string out = ".";
    std::string in;
    std::uint64_t seed = 1;
    std::vector<std::string> formats{"json"};
    std::string calibration;
    int draws = 20;
    int samples = 100;
};

spectral::ProblemSpec load(const Options& o)
{
    if (o.problem.empty())
        throw ArgumentError("--problem is required");
    try {
        return spectral::load_problem(o.problem);
    } catch (const std::exception& e) {
        throw ArgumentError(e.what());
    }
}

// writes every requested format; returns the exit code for the report
int finish(const StudyReport& r, const Options& o)
{
    fs::create_directories(o.out);
    for (const auto& f : o.formats)
        std::cout << "wrote " << experiments::emit_report(r, experiments::parse_format(f), o.out).string() << '\n';
    for (const auto& [k, v] : r.timings)
        std::cerr << "time " << k << ": " << v << " s\n";
    for (const auto& f : r.failures)
        std::cerr << "failure: " << f << '\n';
    return r.ok() ? ok_code : failure_code;
}

int cmd_solve(const Options& o)
{
    const auto pb = load(o);
    const int p = o.p > 0 ? o.p : pb.p;
    const int q = o.q > 0 ? o.q : std::max(pb.q, p + 1);
    const auto& c = pb.coefficient;
    const spectral::PeriodicBasis basis(c.d, p, c.kind == spectral::CoefficientKind::reaction_diffusion);
    const auto sys = spectral::assemble(c, basis, spectral::gauss_lobatto(q, c.d), pb.source);
    const spectral::SolutionField u(basis, sys.solution);
    StudyReport r;
    r.kind = "solve";
    r.seed = o.seed;
    r.grid = {{"problem", pb.name}, {"p", p}, {"q", q}};
    r.columns = {"index", "coefficient"};
    r.x_column = "index";
    for (Eigen::Index i = 0; i < sys.solution.size(); ++i)
        r.add_row({double(i), sys.solution(i)});
    const auto sb = spectral::spectrum_bounds(sys);
    r.fits["lambda_min"] = sb.lambda_min;
    r.fits["lambda_max"] = sb.lambda_max;
    if (pb.exact) {
        const auto e = spectral::error_norms(spectral::ExprField(c.d, *pb.exact), u);
        r.fits["l2_error"] = e.l2;
        r.fits["h1_error"] = e.h1;
        std::cout << "H1 error " << e.h1 << ", L2 error " << e.l2 << '\n';
    }
    return finish(r, o);
}

int cmd_converge(const Options& o)
{
    const auto pb = load(o);
    const int d = pb.coefficient.d;
    const int lo = o.p > 0 ? o.p : (d == 1 ? 4 : 3);
    const int hi = o.p_max > 0 ? o.p_max : (d == 1 ? 16 : d == 2 ? 8 : 5);
    const int offset = o.q > 0 ? o.q : 1;
    StudyReport r;
    try {
        r = experiments::convergence_study(pb, lo, hi, offset);
    } catch (const PreconditionError& e) {
        throw ArgumentError(e.what());
    }
    r.seed = o.seed;
    std::cout << "b_G " << r.fits["b_G"] << ", residual/range " << r.fits["residual_fraction"] << '\n';
    return finish(r, o);
}

experiments::CalibrationResult run_calibration(const spectral::ProblemSpec& pb, const Options& o)
{
    experiments::CalibrationOptions c;
    c.seed = o.seed;
    if (o.p > 0)
        c.p_lo = o.p;
    c.p_hi = o.p_max;
    return experiments::calibrate(pb, c);
}

int cmd_calibrate(const Options& o)
{
    const auto pb = load(o);
    const auto cal = run_calibration(pb, o);
    std::cout << "C_G " << cal.calibration.C_G << ", b_G " << cal.calibration.b_G << ", sup_u " << cal.sup_u << '\n';
    // build-onet --calibration reads the JSON report, so it is always written
    Options with_json = o;
    if (std::find(o.formats.begin(), o.formats.end(), "json") == o.formats.end())
        with_json.formats.push_back("json");
    return finish(cal.report, with_json);
}

int cmd_build(const Options& o)
{
    const auto pb = load(o);
    std::optional<onet::OperatorNet> net;
    if (pb.family) {
        if (o.eps.size() != 1)
            throw ArgumentError("parametric builds need one --eps");
        const auto fam = onet::ParametricFamily::from_spec(*pb.family, pb.coefficient.d);
        net.emplace(onet::build_parametric_onet(fam, pb.source, o.eps[0]));
    } else if (!o.eps.empty()) {
        if (o.eps.size() != 1)
            throw ArgumentError("build-onet takes one --eps");
        onet::Calibration cal;
        double sup_u = 0.0;
        if (!o.calibration.empty()) {
            std::ifstream in(o.calibration);
            if (!in)
                throw ArgumentError("cannot open calibration file " + o.calibration);
            try {
                const auto fits = nlohmann::json::parse(in).at("fits");
                cal.C_G = fits.at("C_G");
                cal.b_G = fits.at("b_G");
                sup_u = fits.at("sup_u");
            } catch (const nlohmann::json::exception& e) {
                throw ArgumentError("malformed calibration report: " + std::string(e.what()));
            }
        } else {
            const auto c = run_calibration(pb, o);
            cal = c.calibration;
            sup_u = c.sup_u;
        }
        const auto plan = onet::make_plan(o.eps[0], pb.coefficient.d, onet::ClassBounds::of(pb.coefficient), cal,
                                          sup_u, pb.coefficient.kind == spectral::CoefficientKind::reaction_diffusion);
        net.emplace(onet::build_onet(pb, plan));
    } else {
        onet::ExplicitBuild b;
        if (o.p > 0)
            b.p = o.p;
        b.q = o.q > 0 ? o.q : b.p + 1;
        net.emplace(onet::build_onet(pb, b));
    }
    onet::save_bundle(*net, o.out);
    const auto& rep = net->report;
    std::cout << "p " << rep.p << ", q " << rep.q << ", branch " << rep.branch_size << " weights / depth "
              << rep.branch_depth << ", trunk " << rep.trunk_size << " weights / depth " << rep.trunk_depth
              << ", built in " << rep.build_seconds << " s\nbundle written to " << o.out << '\n';
    return ok_code;
}

int cmd_eval(const Options& o)
{
    if (o.in.empty())
        throw ArgumentError("--in <bundle dir> is required");
    const auto pb = load(o);
    const onet::OperatorNet net = onet::load_bundle(o.in);
    const int d = pb.coefficient.d;
    const auto rule = spectral::network_error_rule(d);
    StudyReport r;
    r.kind = "eval";
    r.seed = o.seed;
    r.grid = {{"problem", pb.name}, {"bundle", o.in}};
    r.columns = {"draw", "h1_error"};
    r.x_column = "draw";
    r.series = {"h1_error"};
    if (net.encoder.kind == onet::EncoderKind::parametric) {
        if (!pb.family)
            throw ArgumentError("parametric bundle needs a problem with a family");
        r.columns = {"y1", "h1_error"};
        r.x_column = "y1";
        const auto fam = onet::ParametricFamily::from_spec(*pb.family, d);
        double sup = 0.0;
        for (const auto& y : onet::parameter_grid(fam, 21)) {
            const auto a = fam.at(y, -1, fam.a_min, net.report.extra.value("inner_continuity", 0.0));
            const double e =
                spectral::error_norms(onet::reference_solution(a, pb.source), onet::eval_field(net, y), rule).h1;
            r.add_row({y[0], e});
            sup = std::max(sup, e);
        }
        r.fits["sup_h1_error"] = sup;
    } else {
        std::vector<spectral::CoefficientField> coefs{pb.coefficient};
        for (auto& c : experiments::test_family(pb, o.draws, o.seed))
            coefs.push_back(std::move(c));
        double sup = 0.0;
        for (std::size_t i = 0; i < coefs.size(); ++i) {
            const bool own = i == 0 && pb.exact;
            const auto field = onet::eval_field(net, coefs[i]);
            const double e = own ? spectral::error_norms(spectral::ExprField(d, *pb.exact), field, rule).h1
                                 : spectral::error_norms(onet::reference_solution(coefs[i], pb.source), field, rule).h1;
            r.add_row({double(i), e});
            sup = std::max(sup, e);
        }
        r.fits["sup_h1_error"] = sup;
    }
    std::cout << "sup H1 error " << r.fits["sup_h1_error"] << '\n';
    return finish(r, o);
}

int cmd_study(const std::string& which, const Options& o)
{
    StudyReport r;
    if (which == "inv") {
        const std::vector<double> eps = o.eps.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3} : o.eps;
        r = experiments::invnet_study({1, 2, 4, 8}, eps, {0.25, 0.5}, o.samples, o.seed);
    } else if (which == "size") {
        const auto pb = load(o);
        experiments::OnetStudyOptions s;
        s.seed = o.seed;
        s.test_draws = o.draws;
        const std::vector<double> eps = o.eps.empty() ? std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3} : o.eps;
        r = experiments::size_scaling_study(pb, eps, s);
    } else if (which == "lipschitz") {
        const auto pb = load(o);
        r = experiments::lipschitz_study(pb, {1e-1, 1e-2, 1e-3, 1e-4}, o.p);
    } else if (which == "parametric") {
        const auto pb = load(o);
        if (!pb.family)
            throw ArgumentError("problem has no parametric family");
        const double eps = o.eps.empty() ? 0.1 : o.eps[0];
        r = experiments::parametric_study(onet::ParametricFamily::from_spec(*pb.family, pb.coefficient.d),
                                          pb.source, eps);
    } else {
        throw ArgumentError("unknown study '" + which + "'");
    }
    r.seed = o.seed;
    return finish(r, o);
}

int cmd_emit(const Options& o)
{
    if (o.in.empty())
        throw ArgumentError("--in <report.json> is required");
    std::ifstream in(o.in);
    if (!in)
        throw ArgumentError("cannot open " + o.in);
    return finish(experiments::report_from_json(nlohmann::json::parse(in)), o);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Operator networks for periodic elliptic problems"};
    app.require_subcommand(1);
    Options o;
    std::string study_kind;

    auto common = [&](CLI::App* s) {
        s->add_option("--problem", o.problem, "problem JSON file");
        s->add_option("--out", o.out, "output directory");
        s->add_option("--seed", o.seed, "global random seed");
        s->add_option("--format", o.formats, "csv, json and/or svg")->delimiter(',');
    };
    auto* solve = app.add_subcommand("solve", "spectral Galerkin solve");
    common(solve);
    solve->add_option("--p", o.p, "polynomial degree");
    solve->add_option("--q", o.q, "quadrature points per axis");

    auto* conv = app.add_subcommand("converge", "convergence study over p");
    common(conv);
    conv->add_option("--p", o.p, "lowest degree");
    conv->add_option("--p-max", o.p_max, "highest degree");
    conv->add_option("--q", o.q, "q - p (default 1)");

    auto* cal = app.add_subcommand("calibrate", "fit C_G, b_G on a pilot run");
    common(cal);
    cal->add_option("--p", o.p, "lowest pilot degree");
    cal->add_option("--p-max", o.p_max, "highest pilot degree");

    auto* build = app.add_subcommand("build-onet", "build an operator network bundle");
    common(build);
    build->add_option("--eps", o.eps, "target H1 accuracy")->delimiter(',');
    build->add_option("--p", o.p, "degree for an explicit build");
    build->add_option("--q", o.q, "quadrature points for an explicit build");
    build->add_option("--calibration", o.calibration, "calibration.json report from `calibrate`");

    auto* eval = app.add_subcommand("eval-onet", "measure a bundle's H1 error");
    common(eval);
    eval->add_option("--in", o.in, "bundle directory")->required();
    eval->add_option("--draws", o.draws, "random test coefficients");

    auto* study = app.add_subcommand("study", "inv | size | lipschitz | parametric");
    common(study);
    study->add_option("kind", study_kind, "study kind")->required()->check(
        CLI::IsMember({"inv", "size", "lipschitz", "parametric"}));
    study->add_option("--eps", o.eps, "accuracy targets")->delimiter(',');
    study->add_option("--p", o.p, "degree (lipschitz)");
    study->add_option("--draws", o.draws, "random test coefficients (size)");
    study->add_option("--samples", o.samples, "matrices per cell (inv)");

    auto* emit = app.add_subcommand("emit", "re-emit a JSON report");
    common(emit);
    emit->add_option("--in", o.in, "report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok_code : argument_code;
    }
    try {
        for (const auto& f : o.formats)
            experiments::parse_format(f);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return argument_code;
    }

    try {
        if (solve->parsed())
            return cmd_solve(o);
        if (conv->parsed())
            return cmd_converge(o);
        if (cal->parsed())
            return cmd_calibrate(o);
        if (build->parsed())
            return cmd_build(o);
        if (eval->parsed())
            return cmd_eval(o);
        if (study->parsed())
            return cmd_study(study_kind, o);
        return cmd_emit(o);
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return argument_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
