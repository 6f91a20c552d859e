// Copyright (C) 2026 The spikelab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spikelab/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

bool parse_double(std::string field, double& out) {
  const auto b = field.find_first_not_of(" \t\r");
  const auto e = field.find_last_not_of(" \t\r");
  if (b == std::string::npos) return false;
  field = field.substr(b, e - b + 1);
  const char* first = field.data();
  const char* last = first + field.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ',';
      os << fmt17(A(i, j));
    }
    os << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& A) {
  std::ostringstream os;
  write_matrix_csv(os, A);
  write_text_file(path, os.str());
}

Eigen::MatrixXd read_matrix_csv(std::istream& is, bool allow_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_commas(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool ok = true;
    std::size_t bad = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      double v;
      if (!parse_double(fields[k], v)) {
        ok = false;
        bad = k;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first_content && allow_header) {
        first_content = false;
        continue;
      }
      std::ostringstream os;
      os << "CSV line " << lineno << ", field " << (bad + 1) << ": not a number: '" << fields[bad] << "'";
      throw ConfigError(os.str());
    }
    first_content = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << "CSV line " << lineno << ": expected " << rows.front().size() << " fields, found " << row.size();
      throw ConfigError(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("CSV input contains no data rows");
  Eigen::MatrixXd A(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) A(i, j) = rows[i][j];
  }
  return A;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, bool allow_header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_matrix_csv(in, allow_header);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spikelab
