#include "pdeonet/experiments/report.hpp"
#include "pdeonet/experiments/studies.hpp"
#include "pdeonet/nn/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace pdeonet;
using namespace pdeonet::experiments;

namespace {

std::string slurp(const std::filesystem::path& f)
{
    std::ifstream in(f);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int count(const std::string& s, const std::string& what)
{
    int n = 0;
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1))
        ++n;
    return n;
}

StudyReport sample_report()
{
    StudyReport r;
    r.kind = "sample";
    r.columns = {"p", "a", "b"};
    r.x_column = "p";
    r.series = {"a", "b"};
    r.seed = 99;
    r.add_row({1, 0.1, 1.0 / 3});
    r.add_row({2, 0.01, std::nextafter(0.2, 1.0)});
    r.add_row({3, 1e-300, 6.02214076e23});
    r.fits["slope"] = -std::log(10.0);
    return r;
}

} // namespace

TEST(Convergence, ModelProblemFit)
{
    const StudyReport r = convergence_study(spectral::model_problem(1), 4, 16);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.rows.size(), 13u);
    EXPECT_GT(r.fits.at("b_G"), 0.0);
    EXPECT_LE(r.fits.at("residual_fraction"), 0.2);
    EXPECT_EQ(r.fits.at("monotone"), 1.0);
    EXPECT_EQ(r.columns, (std::vector<std::string>{"p", "q", "n_b", "n_q", "l2_error", "h1_error", "lambda_min",
                                                   "lambda_max"}));
}

TEST(Convergence, UnitAndVariableCoefficientSlopes)
{
    spectral::ProblemSpec unit = spectral::model_problem(1);
    unit.coefficient = spectral::CoefficientField::scalar(1, spectral::Expr(1.0), 1.0, 1.0);
    unit.source = spectral::Expr::parse("4*pi*pi*sin(2*pi*x1)");
    EXPECT_LT(convergence_study(unit, 4, 16).fits.at("slope"), 0.0);
    EXPECT_LT(convergence_study(spectral::model_problem(1), 4, 16).fits.at("slope"), 0.0);
}

TEST(Convergence, SingleDegreeRejected)
{
    try {
        convergence_study(spectral::model_problem(1), 5, 5);
        FAIL() << "expected a rejected fit";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("single degree"), std::string::npos);
    }
}

TEST(Calibrate, DegreeCoversPilotTable)
{
    CalibrationOptions o;
    o.family_draws = 4;
    const CalibrationResult c = calibrate(spectral::model_problem(1), o);
    ASSERT_TRUE(c.calibration.valid());
    EXPECT_GT(c.sup_u, 0.0);
    const double eps = 0.1;
    int smallest = -1;
    for (const auto& row : c.report.rows)
        if (row[1] <= eps / 3) {
            smallest = static_cast<int>(row[0]);
            break;
        }
    ASSERT_GT(smallest, 0);
    EXPECT_GE(onet::plan_degree(eps, c.calibration), smallest);
    // doubling C_G costs at most ceil(log 2 / b_G) + 1 degrees
    onet::Calibration twice = c.calibration;
    twice.C_G *= 2;
    for (double e : {0.3, 0.1, 0.01, 1e-4})
        EXPECT_LE(onet::plan_degree(e, twice) - onet::plan_degree(e, c.calibration),
                  static_cast<int>(std::ceil(std::log(2.0) / c.calibration.b_G)) + 1);
    const int p1 = onet::plan_degree(1.0, c.calibration);
    EXPECT_GE(p1, 2);
    EXPECT_LT(p1, 1000);
}

TEST(InvnetStudy, SmallGridPasses)
{
    const StudyReport r = invnet_study({1, 2}, {1e-1, 1e-2}, {0.5}, 20, 5);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.rows.size(), 4u);
    for (double v : r.values("pass"))
        EXPECT_EQ(v, 1.0);
}

TEST(InvnetStudy, FailedCellIsRecorded)
{
    // delta outside (0,1): the cell fails to build, the study carries on
    const StudyReport r = invnet_study({1}, {1e-1}, {1.5, 0.5}, 5, 5);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.rows.size(), 1u);
}

TEST(LipschitzStudy, BoundedSpread)
{
    const StudyReport r = lipschitz_study(spectral::model_problem(1), {1e-1, 1e-2, 1e-3, 1e-4});
    EXPECT_TRUE(r.ok());
    EXPECT_LE(r.fits.at("spread"), 2.0);
}

TEST(Report, EmptyCsvIsHeaderOnly)
{
    StudyReport r;
    r.kind = "empty";
    r.columns = {"p", "h1_error"};
    EXPECT_EQ(to_csv(r), "p,h1_error\n");
}

TEST(Report, JsonRoundTripIsBitExact)
{
    const StudyReport r = sample_report();
    const StudyReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
    ASSERT_EQ(back.rows.size(), r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i)
        for (std::size_t j = 0; j < r.rows[i].size(); ++j)
            EXPECT_EQ(std::bit_cast<std::uint64_t>(back.rows[i][j]), std::bit_cast<std::uint64_t>(r.rows[i][j]));
    EXPECT_EQ(back.fits, r.fits);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.columns, r.columns);
    EXPECT_EQ(back.series, r.series);
}

TEST(Report, SvgHasOnePolylinePerSeries)
{
    StudyReport r = sample_report();
    EXPECT_EQ(count(to_svg(r), "<polyline"), 2);
    r.series = {"a"};
    EXPECT_EQ(count(to_svg(r), "<polyline"), 1);
}

TEST(Report, RowWidthChecked)
{
    StudyReport r = sample_report();
    EXPECT_THROW(r.add_row({1.0}), ShapeError);
    EXPECT_THROW(r.values("missing"), PreconditionError);
    EXPECT_THROW(parse_format("xml"), PreconditionError);
}

TEST(Report, EmitIsDeterministic)
{
    const auto dir = std::filesystem::temp_directory_path() / "pdeonet_emit_test";
    std::filesystem::remove_all(dir);
    std::string first;
    for (int run = 0; run < 2; ++run) {
        const StudyReport r = invnet_study({1, 2}, {1e-1}, {0.5}, 10, 17);
        const auto json = emit_report(r, Format::json, dir);
        const auto csv = emit_report(r, Format::csv, dir);
        const std::string now = slurp(json) + slurp(csv);
        if (run == 0)
            first = now;
        else
            EXPECT_EQ(now, first);
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "invnet.svg"));
    std::filesystem::remove_all(dir);
}

TEST(Report, FilesystemErrorsSurface)
{
    const auto blocker = std::filesystem::temp_directory_path() / "pdeonet_not_a_dir";
    std::ofstream(blocker) << "x";
    EXPECT_ANY_THROW(emit_report(sample_report(), Format::csv, blocker / "sub"));
    std::filesystem::remove(blocker);
}

TEST(Streams, DerivedPerStudy)
{
    auto a = study_stream(1, "x"), b = study_stream(1, "x"), c = study_stream(1, "y"), d = study_stream(2, "x");
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
}
