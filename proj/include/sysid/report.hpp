#ifndef SYSID_REPORT_HPP
#define SYSID_REPORT_HPP

#include <json.hpp>

#include <string>
#include <vector>

namespace sysid {

/// Structured experiment output. `doc` carries the config echo, provenance,
/// per-trial records, aggregates and plot-ready tables; tables live under
/// doc["tables"][name] with "columns" and "rows" arrays so the CSV writer
/// can flatten them.
struct ExperimentReport {
    nlohmann::json doc;

    void add_table(const std::string& name, const std::vector<std::string>& columns);
    void add_row(const std::string& name, const std::vector<double>& row);
};

enum class ReportFormat { json, csv };

ReportFormat parse_format(const std::string& name);

/// JSON: the document verbatim. CSV: one header-and-rows section per table
/// with the config echo in comment lines. IO errors throw.
void emit_report(const ExperimentReport& report, const std::string& path, ReportFormat format);

/// Median and quartiles of a sample (empty input throws).
double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

/// Slope of the least-squares line through (log x_i, log y_i).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace sysid

#endif
