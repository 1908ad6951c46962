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

#include "sglss/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace sglss::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

constexpr std::size_t kMagicLen = 7;
// Refuse headers that would allocate more than this many doubles.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated header");
  return v;
}

// Row-major f64 block.
void put_block(std::ostream& out, const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Matrix get_block(std::istream& in, std::uint64_t rows, std::uint64_t cols) {
  if (rows != 0 && cols > kMaxElements / rows) throw IoError("matrix block too large");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(rows),
                                                                           static_cast<Eigen::Index>(cols));
  if (!in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)))) {
    throw IoError("truncated data block");
  }
  return rm;
}

void expect_magic(std::istream& in, const char* magic, const std::filesystem::path& path) {
  char buf[kMagicLen];
  if (!in.read(buf, kMagicLen) || std::memcmp(buf, magic, kMagicLen) != 0) {
    throw IoError(path.string() + ": bad magic, expected " + std::string(magic, kMagicLen - 1));
  }
}

}  // namespace

void write_dataset_binary(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path, std::ios::binary);
  out.write(kDatasetMagic, kMagicLen);
  put_u64(out, data.n());
  put_u64(out, data.p());
  put_u64(out, data.grid.dim());
  put_u64(out, data.q());
  put_block(out, data.grid.coords());
  put_block(out, data.Y);
  put_block(out, data.X);
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  expect_magic(in, kDatasetMagic, path);
  const auto n = get_u64(in);
  const auto p = get_u64(in);
  const auto K = get_u64(in);
  const auto q = get_u64(in);
  Dataset data;
  data.grid = LocationGrid(get_block(in, p, K));
  data.Y = get_block(in, n, p);
  data.X = get_block(in, n, q);
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes after X block");
  return data;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Matrix& m) {
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
}

void write_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_csv(out, m);
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw IoError(path.string() + ":" + std::to_string(rows + 1) + ": cannot parse number");
      }
      values.push_back(v);
      ++count;
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw IoError(path.string() + ":" + std::to_string(rows + 1) + ": expected ','");
      ++p;
    }
    if (rows == 0) cols = count;
    if (count != cols) {
      throw IoError(path.string() + ":" + std::to_string(rows + 1) + ": expected " + std::to_string(cols) +
                    " columns, got " + std::to_string(count));
    }
    ++rows;
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    }
  }
  return m;
}

void write_dataset_csv(const std::filesystem::path& dir, const Dataset& data) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "grid.csv", data.grid.coords());
  write_csv(dir / "Y.csv", data.Y);
  write_csv(dir / "X.csv", data.X);
}

Dataset read_dataset_csv(const std::filesystem::path& dir) {
  Dataset data;
  data.grid = LocationGrid(read_csv(dir / "grid.csv"));
  data.Y = read_csv(dir / "Y.csv");
  data.X = read_csv(dir / "X.csv");
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such dataset: " + path.string());
  return std::filesystem::is_directory(path) ? read_dataset_csv(path) : read_dataset_binary(path);
}

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path, std::ios::binary);
  out.write(kMatrixMagic, kMagicLen);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  put_block(out, m);
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  expect_magic(in, kMatrixMagic, path);
  const auto rows = get_u64(in);
  const auto cols = get_u64(in);
  return get_block(in, rows, cols);
}

void write_state(std::ostream& out, const ChainState& s) {
  out.write(kStateMagic, kMagicLen);
  const auto n = static_cast<std::uint64_t>(s.Z.rows());
  const auto p = static_cast<std::uint64_t>(s.Z.cols());
  const auto q = static_cast<std::uint64_t>(s.tau.rows());
  put_u64(out, n);
  put_u64(out, p);
  put_u64(out, q);
  put_block(out, s.Z);
  put_block(out, s.beta);
  for (Eigen::Index j = 0; j < s.tau.rows(); ++j) {
    for (Eigen::Index k = 0; k < s.tau.cols(); ++k) out.put(static_cast<char>(s.tau(j, k)));
  }
  put_block(out, s.pi);
  out.write(reinterpret_cast<const char*>(&s.sigma2_eps), sizeof s.sigma2_eps);
  put_block(out, s.Sigma);
}

ChainState read_state(std::istream& in) {
  expect_magic(in, kStateMagic, "chain state");
  const auto n = get_u64(in);
  const auto p = get_u64(in);
  const auto q = get_u64(in);
  ChainState s;
  s.Z = get_block(in, n, p);
  s.beta = get_block(in, q + 1, p);
  s.tau.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < s.tau.rows(); ++j) {
    for (Eigen::Index k = 0; k < s.tau.cols(); ++k) {
      const int c = in.get();
      if (c == std::char_traits<char>::eof()) throw IoError("truncated tau block");
      s.tau(j, k) = static_cast<std::uint8_t>(c);
    }
  }
  s.pi = get_block(in, q, 1);
  if (!in.read(reinterpret_cast<char*>(&s.sigma2_eps), sizeof s.sigma2_eps)) throw IoError("truncated state");
  s.Sigma = get_block(in, p, p);
  return s;
}

}  // namespace sglss::io
