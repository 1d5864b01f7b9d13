#include "pdeonet/experiments/report.hpp"

#include "pdeonet/nn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pdeonet::experiments {

int StudyReport::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw PreconditionError("report '" + kind + "' has no column '" + name + "'");
    return static_cast<int>(it - columns.begin());
}

std::vector<double> StudyReport::values(const std::string& name) const
{
    const int c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows)
        v.push_back(r[static_cast<std::size_t>(c)]);
    return v;
}

void StudyReport::add_row(std::vector<double> row)
{
    if (row.size() != columns.size())
        throw ShapeError("report '" + kind + "': row has " + std::to_string(row.size()) + " entries, expected " +
                         std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

nlohmann::json to_json(const StudyReport& r)
{
    return {{"kind", r.kind},     {"grid", r.grid},       {"columns", r.columns},     {"rows", r.rows},
            {"fits", r.fits},     {"failures", r.failures}, {"seed", r.seed},       {"precision", r.precision},
            {"x_column", r.x_column}, {"series", r.series}};
}

StudyReport report_from_json(const nlohmann::json& j)
{
    StudyReport r;
    r.kind = j.at("kind");
    r.grid = j.value("grid", nlohmann::json::object());
    r.columns = j.at("columns").get<std::vector<std::string>>();
    r.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    r.fits = j.value("fits", std::map<std::string, double>{});
    r.failures = j.value("failures", std::vector<std::string>{});
    r.seed = j.value("seed", std::uint64_t{0});
    r.precision = j.value("precision", std::string("binary64"));
    r.x_column = j.value("x_column", std::string());
    r.series = j.value("series", std::vector<std::string>{});
    return r;
}

Format parse_format(const std::string& s)
{
    if (s == "csv")
        return Format::csv;
    if (s == "json")
        return Format::json;
    if (s == "svg")
        return Format::svg;
    throw PreconditionError("unknown report format '" + s + "' (csv, json, svg)");
}

namespace {

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string to_csv(const StudyReport& r)
{
    std::ostringstream out;
    for (std::size_t c = 0; c < r.columns.size(); ++c)
        out << (c ? "," : "") << r.columns[c];
    out << '\n';
    for (const auto& row : r.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << number(row[c]);
        out << '\n';
    }
    return out.str();
}

std::string to_svg(const StudyReport& r)
{
    const double W = 640, H = 420, L = 70, R = 150, T = 30, B = 50;
    std::vector<std::string> series = r.series;
    std::string xcol = r.x_column.empty() && !r.columns.empty() ? r.columns.front() : r.x_column;
    std::vector<double> xs = r.rows.empty() ? std::vector<double>{} : r.values(xcol);
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (double x : xs) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    for (const auto& s : series)
        for (double y : r.rows.empty() ? std::vector<double>{} : r.values(s))
            if (y > 0.0) {
                ymin = std::min(ymin, std::log10(y));
                ymax = std::max(ymax, std::log10(y));
            }
    if (!(xmax > xmin)) {
        xmin = std::isfinite(xmin) ? xmin - 1 : 0;
        xmax = xmin + 2;
    }
    if (!(ymax > ymin)) {
        ymin = std::isfinite(ymin) ? ymin - 1 : 0;
        ymax = ymin + 2;
    }
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << r.kind << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e)
        out << "<text x=\"" << L - 8 << "\" y=\"" << py(e) + 4 << "\" font-size=\"11\" text-anchor=\"end\">1e" << e
            << "</text>\n";
    out << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << number(xmin) << "</text>\n";
    out << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"end\">"
        << number(xmax) << "</text>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\">" << xcol << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        if (!r.rows.empty()) {
            const std::vector<double> ys = r.values(series[s]);
            for (std::size_t i = 0; i < ys.size(); ++i)
                if (ys[i] > 0.0)
                    out << px(xs[i]) << ',' << py(std::log10(ys[i])) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" font-size=\"11\" fill=\"" << color
            << "\">" << series[s] << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::filesystem::path emit_report(const StudyReport& r, Format format, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const char* ext = format == Format::csv ? ".csv" : format == Format::json ? ".json" : ".svg";
    const std::filesystem::path file = dir / (r.kind + ext);
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
    switch (format) {
    case Format::csv:
        out << to_csv(r);
        break;
    case Format::json:
        out << to_json(r).dump(2) << '\n';
        break;
    case Format::svg:
        out << to_svg(r);
        break;
    }
    if (!out)
        throw std::runtime_error("write failed for " + file.string());
    return file;
}

} // namespace pdeonet::experiments
