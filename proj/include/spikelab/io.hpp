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

// Plain-text numeric IO. Every floating value is written with "%.17g" so
// files round-trip bit-exactly.

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace spikelab {

std::string fmt17(double x);

/// Dense matrix, one row per line, comma separated, no header.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& A);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& A);

/// Reads a dense numeric CSV. Throws ConfigError naming the line and field on
/// malformed input. A first line containing non-numeric fields is treated as
/// a header when allow_header is set.
Eigen::MatrixXd read_matrix_csv(std::istream& is, bool allow_header = false);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, bool allow_header = false);

/// Writes text to path, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace spikelab
