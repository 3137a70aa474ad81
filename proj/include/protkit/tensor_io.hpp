/*
 * Copyright 2026 The protkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// "FKT1" tensor container: magic "FKT1", u8 rank, rank x u32 dims, then the
// f32 payload in row-major order. All integers and floats little-endian.
// Several containers may be concatenated in one file.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "protkit/error.hpp"

namespace protkit {

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  template <typename Derived>
  static Tensor from_matrix(const Eigen::MatrixBase<Derived>& m) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(static_cast<float>(m(r, c)));
    }
    return t;
  }

  Eigen::MatrixXd to_matrix() const {
    if (dims.size() != 2) fail(ErrorKind::DimensionMismatch, "tensor is not rank 2");
    Eigen::MatrixXd m(dims[0], dims[1]);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[k++];
    }
    return m;
  }
};

inline constexpr std::array<std::uint8_t, 4> kTensorMagic = {'F', 'K', 'T', '1'};

inline void append_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
  if (t.dims.size() > 255) fail(ErrorKind::InvalidArgument, "tensor rank above 255");
  if (t.element_count() != t.data.size()) fail(ErrorKind::DimensionMismatch, "payload does not match dims");
  for (auto b : kTensorMagic) out.push_back(b);
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  auto put32 = [&out](std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
  };
  for (auto d : t.dims) put32(d);
  for (float f : t.data) put32(std::bit_cast<std::uint32_t>(f));
}

// Reads one container starting at `offset`; advances offset past it.
inline Tensor read_tensor(std::span<const std::uint8_t> in, std::size_t& offset) {
  auto need = [&](std::size_t bytes) {
    if (in.size() - offset < bytes) fail(ErrorKind::TruncatedPayload, "FKT1 container cut short");
  };
  auto get32 = [&]() {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in[offset + static_cast<std::size_t>(k)]) << (8 * k);
    offset += 4;
    return v;
  };
  if (offset > in.size()) fail(ErrorKind::TruncatedPayload, "offset past end");
  need(5);
  if (!std::equal(kTensorMagic.begin(), kTensorMagic.end(), in.begin() + static_cast<std::ptrdiff_t>(offset))) {
    fail(ErrorKind::BadMagic, "expected FKT1");
  }
  offset += 4;
  const std::size_t rank = in[offset++];
  need(4 * rank);
  Tensor t;
  std::size_t count = 1;
  for (std::size_t r = 0; r < rank; ++r) {
    t.dims.push_back(get32());
    count *= t.dims.back();
    if (count > (in.size() - offset) / 4 + 1) fail(ErrorKind::TruncatedPayload, "payload shorter than dims");
  }
  need(4 * count);
  t.data.resize(count);
  for (std::size_t k = 0; k < count; ++k) t.data[k] = std::bit_cast<float>(get32());
  return t;
}

inline std::vector<Tensor> read_tensors(std::span<const std::uint8_t> in) {
  std::vector<Tensor> out;
  std::size_t offset = 0;
  while (offset < in.size()) out.push_back(read_tensor(in, offset));
  return out;
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorKind::Io, "write failed for " + path);
}

inline void write_file(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

inline std::string read_file_text(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace protkit
