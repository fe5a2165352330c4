#include "cayley/matrix_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cayley {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Index parse_count(const std::string& v, const char* what) {
  long long n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size() || n < 0) {
    throw InputError(std::string("malformed header: ") + what + "='" + v + "'");
  }
  return static_cast<Index>(n);
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw NumericalError("cannot format double");
  return std::string(buf.data(), ptr);
}

CsvMatrix parse_matrix_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  Index rows = 0;
  Index cols = 0;
  CsvMatrix out;
  std::vector<double> data;
  Index rows_read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!have_header) {
      if (t[0] != '#') throw InputError("line " + std::to_string(line_no) + ": missing '# rows=... cols=...' header");
      std::istringstream hs(t.substr(1));
      std::string tok;
      bool got_rows = false;
      bool got_cols = false;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw InputError("malformed header token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "rows") {
          rows = parse_count(val, "rows");
          got_rows = true;
        } else if (key == "cols") {
          cols = parse_count(val, "cols");
          got_cols = true;
        } else {
          out.attributes[key] = val;
        }
      }
      if (!got_rows || !got_cols) throw InputError("malformed header: rows and cols are required");
      have_header = true;
      data.reserve(static_cast<std::size_t>(rows * cols));
      continue;
    }
    if (t[0] == '#') continue;
    Index found = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = t.find(',', start);
      const std::string cell = trim(std::string_view(t).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw InputError("line " + std::to_string(line_no) + ", column " + std::to_string(found + 1) +
                         ": non-numeric cell '" + cell + "'");
      }
      data.push_back(v);
      ++found;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (found != cols) {
      throw InputError("line " + std::to_string(line_no) + ": ragged row with " + std::to_string(found) +
                       " values, expected " + std::to_string(cols));
    }
    ++rows_read;
  }
  if (!have_header) throw InputError("empty input: no header and no data");
  if (rows_read != rows) {
    throw InputError("header declares " + std::to_string(rows) + " rows but " + std::to_string(rows_read) +
                     " were read");
  }
  out.values.resize(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out.values(i, j) = data[static_cast<std::size_t>(i * cols + j)];
  }
  return out;
}

CsvMatrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text_file(path));
}

std::string format_matrix_csv(const Matrix& m, const std::map<std::string, std::string>& attributes) {
  std::string s = "# rows=" + std::to_string(m.rows()) + " cols=" + std::to_string(m.cols());
  for (const auto& [k, v] : attributes) {
    if (k == "rows" || k == "cols") continue;
    s += " " + k + "=" + v;
  }
  s += "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) s += ',';
      s += format_double(m(i, j));
    }
    s += '\n';
  }
  return s;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::map<std::string, std::string>& attributes) {
  write_text_file(path, format_matrix_csv(m, attributes));
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir,
                                                const ReportWriteOptions& options) {
  std::vector<std::filesystem::path> written;
  nlohmann::json doc;
  doc["name"] = report.name;
  doc["config"] = report.config;
  doc["metrics"] = report.metrics;
  nlohmann::json tables = nlohmann::json::object();
  for (const auto& [key, table] : report.tables) {
    const std::string file = key + ".csv";
    auto attrs = table.attributes;
    std::string cols;
    for (std::size_t i = 0; i < table.columns.size(); ++i) cols += (i ? ";" : "") + table.columns[i];
    if (!cols.empty()) attrs["columns"] = cols;
    write_matrix_csv(dir / file, table.data, attrs);
    written.push_back(dir / file);
    tables[key] = {{"file", file}, {"columns", table.columns}};
  }
  doc["tables"] = tables;
  if (options.include_runtime) doc["runtime_seconds"] = report.runtime_seconds;
  write_text_file(dir / "report.json", doc.dump(2) + "\n");
  written.push_back(dir / "report.json");
  return written;
}

ExperimentReport read_report(const std::filesystem::path& dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(dir / "report.json"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report.json: ") + e.what());
  }
  ExperimentReport r;
  r.name = doc.value("name", "");
  r.config = doc.value("config", nlohmann::json::object());
  r.metrics = doc.value("metrics", nlohmann::json::object());
  r.runtime_seconds = doc.value("runtime_seconds", 0.0);
  const nlohmann::json tables = doc.value("tables", nlohmann::json::object());
  for (const auto& [key, entry] : tables.items()) {
    CsvMatrix m = read_matrix_csv(dir / entry.at("file").get<std::string>());
    Table t;
    t.columns = entry.at("columns").get<std::vector<std::string>>();
    t.data = std::move(m.values);
    m.attributes.erase("columns");
    t.attributes = std::move(m.attributes);
    r.tables[key] = std::move(t);
  }
  return r;
}

}  // namespace cayley
