// core/common.h

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

#ifndef SVBN_CORE_COMMON_H_
#define SVBN_CORE_COMMON_H_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>

namespace svbn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Status codes shared with the C API and the CLI exit codes.
enum class Status : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kDependency = 3,
  kNumeric = 4,
  kIo = 5,
  kFormat = 6,
  kArg = 7,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

[[noreturn]] void Throw(Status status, const std::string& message);

// Deterministic RNG. Gaussian draws use Box-Muller on top of mt19937_64 so
// the byte stream does not depend on the standard library's
// normal_distribution implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double Uniform();                    // [0, 1)
  double Uniform(double lo, double hi);
  double Gaussian();                   // N(0, 1)
  uint64_t Integer(uint64_t bound);    // [0, bound)
  uint64_t Raw() { return engine_(); }

  // Fisher-Yates over [0, n).
  std::vector<uint32_t> Permutation(uint32_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

uint64_t Fnv1a64(const void* data, size_t size);
uint64_t Fnv1a64(const std::string& text);
uint64_t Fnv1a64File(const std::string& path);

// Little-endian primitives for the binary file formats.
namespace io {
void WriteU32(std::ostream& os, uint32_t value);
void WriteU64(std::ostream& os, uint64_t value);
void WriteF32(std::ostream& os, float value);
void WriteF64(std::ostream& os, double value);
void WriteByte(std::ostream& os, uint8_t value);
uint32_t ReadU32(std::istream& is, const std::string& context);
uint64_t ReadU64(std::istream& is, const std::string& context);
float ReadF32(std::istream& is, const std::string& context);
double ReadF64(std::istream& is, const std::string& context);
uint8_t ReadByte(std::istream& is, const std::string& context);
// Reads and checks a 4-byte magic; throws kFormat with the byte offset.
void ExpectMagic(std::istream& is, const char magic[4], const std::string& context);
void WriteMagic(std::ostream& os, const char magic[4]);
}  // namespace io

void RequireFinite(const Matrix& m, const std::string& what);
void RequireFinite(double v, const std::string& what);

// Vertical stack of equal-width matrices.
Matrix ConcatRows(const std::vector<Matrix>& blocks);

}  // namespace svbn

#endif  // SVBN_CORE_COMMON_H_
