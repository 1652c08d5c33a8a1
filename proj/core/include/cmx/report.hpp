#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cmx/analysis.hpp"
#include "cmx/geometry.hpp"
#include "cmx/scoring.hpp"

namespace cmx::io {

inline constexpr std::string_view kReportVersion = "cmx-report/1";
inline constexpr std::string_view kModelVersion = "cmx-model/1";

struct Report {
  std::string format_version = std::string(kReportVersion);
  std::map<std::string, std::string> config;  // echo of the options that produced it
  std::vector<std::string> classes;           // order of every per-class distance vector
  DatasetStats stats;
  std::vector<ComplexityRecord> records;
  std::vector<Slice> slices;

  friend bool operator==(const Report&, const Report&) = default;
};

enum class ReportFormat { Json, CsvBundle };
ReportFormat parse_report_format(std::string_view text);

void write_report_json(const Report& report, std::ostream& out);
Report parse_report_json(std::istream& in);

/// Writes stats.csv, records.csv and slices.csv into `directory`.
void write_report_csv_bundle(const Report& report, const std::filesystem::path& directory);

/// JSON goes to `output` as a file; the CSV bundle treats it as a directory.
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& output);

// Individual tables, also used by the CLI subcommands.
void write_stats_csv(const DatasetStats& stats, std::ostream& out);
void write_slices_csv(const std::vector<Slice>& slices, std::ostream& out);
void write_records_csv(const std::vector<ComplexityRecord>& records,
                       const std::vector<std::string>& classes, std::ostream& out);

struct RecordsFile {
  std::vector<std::string> classes;
  std::vector<ComplexityRecord> records;
};
RecordsFile parse_records_csv(std::istream& in);

/// Geometry model with every matrix, so a saved model scores identically.
void write_model_json(const GeometryModel& model, std::ostream& out);
GeometryModel parse_model_json(std::istream& in);

std::string_view to_string(Shrinkage shrinkage) noexcept;
Shrinkage parse_shrinkage(std::string_view text);

}  // namespace cmx::io
