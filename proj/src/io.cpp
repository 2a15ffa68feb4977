#include "io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "model.hpp"

namespace pfgcg::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  if (begin == end) return false;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_matrix_csv(const std::string& path, const Mat2<double>& m) {
  std::ofstream out(path);
  if (!out) throw DataError("write_matrix_csv: cannot open " + path);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw DataError("write_matrix_csv: write failed for " + path);
}

void write_matrix_csv(const std::string& path, const Mat2<std::uint8_t>& m) {
  std::ofstream out(path);
  if (!out) throw DataError("write_matrix_csv: cannot open " + path);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << static_cast<int>(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw DataError("write_matrix_csv: write failed for " + path);
}

Mat2<double> read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool first_content_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool ok = true;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], row[c])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      if (first_content_row) {
        // One non-numeric leading row is a header.
        first_content_row = false;
        continue;
      }
      throw DataError("read_matrix_csv: non-numeric cell at line " +
                      std::to_string(line_no) + " of " + path);
    }
    first_content_row = false;
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw DataError("read_matrix_csv: ragged row at line " + std::to_string(line_no) +
                      " of " + path + " (expected " + std::to_string(rows.front().size()) +
                      " fields, got " + std::to_string(row.size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("read_matrix_csv: no numeric rows in " + path);
  Mat2<double> m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), 0.0);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

std::map<std::string, std::string> read_key_value(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_key_value: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("read_key_value: missing '=' at line " + std::to_string(line_no) +
                        " of " + path);
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("read_key_value: empty key at line " + std::to_string(line_no) +
                        " of " + path);
    }
    out[key] = value;
  }
  return out;
}

void write_key_value(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("write_key_value: cannot open " + path);
  for (const auto& [key, value] : entries) {
    out << key << " = " << value << '\n';
  }
  if (!out) throw DataError("write_key_value: write failed for " + path);
}

}  // namespace pfgcg::io
