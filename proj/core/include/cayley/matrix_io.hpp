#pragma once

// CSV matrices with a `# rows=<n> cols=<c> key=value ...` header, and
// structured experiment reports (JSON metadata plus CSV tables).

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cayley/types.hpp"

namespace cayley {

struct CsvMatrix {
  Matrix values;
  /// Header attributes other than rows and cols.
  std::map<std::string, std::string> attributes;
};

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

CsvMatrix parse_matrix_csv(const std::string& text);
CsvMatrix read_matrix_csv(const std::filesystem::path& path);
std::string format_matrix_csv(const Matrix& m, const std::map<std::string, std::string>& attributes = {});
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::map<std::string, std::string>& attributes = {});

struct Table {
  std::vector<std::string> columns;
  Matrix data;
  std::map<std::string, std::string> attributes;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json metrics = nlohmann::json::object();
  /// Written as <key>.csv next to report.json.
  std::map<std::string, Table> tables;
  double runtime_seconds = 0.0;
};

struct ReportWriteOptions {
  /// Wall-clock time varies between runs; off by default so that reruns are
  /// byte-identical.
  bool include_runtime = false;
};

/// Writes report.json and one CSV per table; returns the paths written.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir,
                                                const ReportWriteOptions& options = {});
/// Reads back a report written by write_report (runtime excluded).
ExperimentReport read_report(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cayley
