// Copyright 2026 The SGLSS Authors
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

#pragma once

// Dataset and matrix file formats.
//
// BIOSR1 dataset: "BIOSR1\n", little-endian u64 n, p, K, q, then f64 grid
// coordinates (p x K), Y (n x p) and X (n x q), all row-major.
//
// BIOSM1 matrix block: "BIOSM1\n", u64 rows, u64 cols, f64 row-major data.
//
// CSV: headerless, comma separated, 17 significant digits.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sglss/model.hpp"

namespace sglss::io {

inline constexpr char kDatasetMagic[] = "BIOSR1\n";
inline constexpr char kMatrixMagic[] = "BIOSM1\n";
inline constexpr char kStateMagic[] = "BIOSC1\n";

void write_dataset_binary(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_binary(const std::filesystem::path& path);

/// Writes grid.csv, Y.csv and X.csv into `dir`.
void write_dataset_csv(const std::filesystem::path& dir, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& dir);

/// A directory is read as CSV, anything else as BIOSR1.
Dataset read_dataset(const std::filesystem::path& path);

std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const Matrix& m);
void write_csv(std::ostream& out, const Matrix& m);
Matrix read_csv(const std::filesystem::path& path);

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_binary(const std::filesystem::path& path);

/// Bit-exact binary serialization of a chain state.
void write_state(std::ostream& out, const ChainState& state);
ChainState read_state(std::istream& in);

}  // namespace sglss::io
