// core/common.cc

// Copyright 2026  The svbn Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/common.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace svbn {

void Throw(Status status, const std::string& message) {
  throw Error(status, message);
}

double Rng::Uniform() {
  // 53-bit mantissa from the top bits of the 64-bit draw.
  return (engine_() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

double Rng::Gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = Uniform();
  } while (u1 <= 1e-300);
  double u2 = Uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(theta);
  have_spare_ = true;
  return radius * std::cos(theta);
}

uint64_t Rng::Integer(uint64_t bound) {
  if (bound == 0) Throw(Status::kArg, "Rng::Integer: bound must be positive");
  // Rejection sampling keeps the draw unbiased.
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t value;
  do {
    value = engine_();
  } while (value >= limit);
  return value % bound;
}

std::vector<uint32_t> Rng::Permutation(uint32_t n) {
  std::vector<uint32_t> perm(n);
  for (uint32_t i = 0; i < n; ++i) perm[i] = i;
  for (uint32_t i = n; i > 1; --i) {
    uint32_t j = static_cast<uint32_t>(Integer(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

uint64_t Fnv1a64(const void* data, size_t size) {
  const uint8_t* bytes = static_cast<const uint8_t*>(data);
  uint64_t hash = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

uint64_t Fnv1a64(const std::string& text) { return Fnv1a64(text.data(), text.size()); }

uint64_t Fnv1a64File(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Status::kIo, "cannot open for hashing: " + path);
  uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[8192];
  while (is) {
    is.read(buffer, sizeof(buffer));
    std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<uint8_t>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

namespace io {

namespace {
void PutBytes(std::ostream& os, const void* data, size_t size) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!os) Throw(Status::kIo, "write failed");
}

void GetBytes(std::istream& is, void* data, size_t size, const std::string& context) {
  std::streampos at = is.tellg();
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!is) {
    Throw(Status::kFormat, context + ": truncated at byte offset " +
                               std::to_string(static_cast<long long>(at)));
  }
}
}  // namespace

void WriteU32(std::ostream& os, uint32_t value) {
  uint8_t b[4] = {static_cast<uint8_t>(value), static_cast<uint8_t>(value >> 8),
                  static_cast<uint8_t>(value >> 16), static_cast<uint8_t>(value >> 24)};
  PutBytes(os, b, 4);
}

void WriteU64(std::ostream& os, uint64_t value) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(value >> (8 * i));
  PutBytes(os, b, 8);
}

void WriteF32(std::ostream& os, float value) {
  uint32_t bits;
  std::memcpy(&bits, &value, 4);
  WriteU32(os, bits);
}

void WriteF64(std::ostream& os, double value) {
  uint64_t bits;
  std::memcpy(&bits, &value, 8);
  WriteU64(os, bits);
}

void WriteByte(std::ostream& os, uint8_t value) { PutBytes(os, &value, 1); }

uint32_t ReadU32(std::istream& is, const std::string& context) {
  uint8_t b[4];
  GetBytes(is, b, 4, context);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint64_t ReadU64(std::istream& is, const std::string& context) {
  uint8_t b[8];
  GetBytes(is, b, 8, context);
  uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<uint64_t>(b[i]) << (8 * i);
  return value;
}

float ReadF32(std::istream& is, const std::string& context) {
  uint32_t bits = ReadU32(is, context);
  float value;
  std::memcpy(&value, &bits, 4);
  return value;
}

double ReadF64(std::istream& is, const std::string& context) {
  uint64_t bits = ReadU64(is, context);
  double value;
  std::memcpy(&value, &bits, 8);
  return value;
}

uint8_t ReadByte(std::istream& is, const std::string& context) {
  uint8_t b;
  GetBytes(is, &b, 1, context);
  return b;
}

void ExpectMagic(std::istream& is, const char magic[4], const std::string& context) {
  char got[4];
  GetBytes(is, got, 4, context);
  if (std::memcmp(got, magic, 4) != 0) {
    Throw(Status::kFormat, context + ": bad magic at byte offset 0, expected '" +
                               std::string(magic, 4) + "' got '" + std::string(got, 4) + "'");
  }
}

void WriteMagic(std::ostream& os, const char magic[4]) { PutBytes(os, magic, 4); }

}  // namespace io

void RequireFinite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) Throw(Status::kNumeric, what + ": non-finite values");
}

void RequireFinite(double v, const std::string& what) {
  if (!std::isfinite(v)) Throw(Status::kNumeric, what + ": non-finite value");
}

Matrix ConcatRows(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) Throw(Status::kArg, "ConcatRows: no blocks");
  Eigen::Index rows = 0;
  const Eigen::Index cols = blocks.front().cols();
  for (const auto& b : blocks) {
    if (b.cols() != cols) Throw(Status::kArg, "ConcatRows: width mismatch");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace svbn
