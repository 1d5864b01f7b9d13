#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pdeonet::experiments {

struct StudyReport {
    std::string kind;
    nlohmann::json grid = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> fits;
    std::vector<std::string> failures;
    std::uint64_t seed = 0;
    std::string precision = "binary64";
    // plotting: x column and the series drawn against it on a log y axis
    std::string x_column;
    std::vector<std::string> series;
    // wall-clock seconds; kept out of every emitted format so fixed seeds give identical files
    std::map<std::string, double> timings;

    bool ok() const { return failures.empty(); }
    int column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
    void add_row(std::vector<double> row);
};

nlohmann::json to_json(const StudyReport& r);
StudyReport report_from_json(const nlohmann::json& j);

enum class Format { csv, json, svg };
Format parse_format(const std::string& s);

std::string to_csv(const StudyReport& r);
std::string to_svg(const StudyReport& r);

// Writes <dir>/<kind>.<ext>; returns the file path.
std::filesystem::path emit_report(const StudyReport& r, Format format, const std::filesystem::path& dir);

} // namespace pdeonet::experiments
