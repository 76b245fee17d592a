#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "csen/experiment.hpp"

namespace csen {

enum class ReportFormat { text, csv, json };

ReportFormat parse_report_format(const std::string& name);
ReportFormat report_format_for_path(const std::filesystem::path& path);

// The first line of every rendering is the only one carrying a timestamp.
std::string render_report(const EvaluationReport& report, ReportFormat format,
                          const std::string& timestamp);
void write_report(const EvaluationReport& report, const std::filesystem::path& path,
                  ReportFormat format);

// Parses the csv rendering back into a report.
EvaluationReport read_report_csv(std::istream& in, const std::string& source);

// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace csen
