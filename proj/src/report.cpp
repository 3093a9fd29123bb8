#include "sysid/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sysid {

void ExperimentReport::add_table(const std::string& name,
                                 const std::vector<std::string>& columns) {
    doc["tables"][name] = {{"columns", columns}, {"rows", nlohmann::json::array()}};
}

void ExperimentReport::add_row(const std::string& name, const std::vector<double>& row) {
    doc["tables"][name]["rows"].push_back(row);
}

ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw std::invalid_argument("unknown report format: " + name);
}

void emit_report(const ExperimentReport& report, const std::string& path, ReportFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    if (format == ReportFormat::json) {
        out << report.doc.dump(2) << '\n';
    } else {
        out << "# config " << report.doc.value("config", nlohmann::json::object()).dump() << '\n';
        out << "# seed " << report.doc.value("seed", 0ULL) << '\n';
        if (report.doc.contains("tables")) {
            for (const auto& [name, table] : report.doc["tables"].items()) {
                out << "# table " << name << '\n';
                const auto& cols = table["columns"];
                for (std::size_t i = 0; i < cols.size(); ++i)
                    out << cols[i].get<std::string>() << (i + 1 < cols.size() ? "," : "");
                out << '\n';
                for (const auto& row : table["rows"]) {
                    for (std::size_t i = 0; i < row.size(); ++i)
                        out << row[i].dump() << (i + 1 < row.size() ? "," : "");
                    out << '\n';
                }
                out << '\n';
            }
        }
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * double(values.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::size_t(std::ceil(pos));
    const double frac = pos - double(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace sysid
