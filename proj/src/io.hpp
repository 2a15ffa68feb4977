#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace pfgcg::io {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

void write_matrix_csv(const std::string& path, const Mat2<double>& m);
void write_matrix_csv(const std::string& path, const Mat2<std::uint8_t>& m);

// Rectangular numeric CSV. A single non-numeric first row is treated as a
// header and skipped; ragged rows and non-numeric cells are errors naming
// the offending line.
Mat2<double> read_matrix_csv(const std::string& path);

// Flat configuration file: one `key = value` per line, '#' comments.
std::map<std::string, std::string> read_key_value(const std::string& path);
void write_key_value(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace pfgcg::io
