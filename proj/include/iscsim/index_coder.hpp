// Copyright 2026 The iscsim Authors
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

#ifndef ISCSIM_INDEX_CODER_HPP
#define ISCSIM_INDEX_CODER_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "iscsim/random_stream.hpp"

namespace iscsim {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Big-endian bit-packed string with an explicit bit count and no framing.
class BitString {
 public:
  void push_back(bool bit);
  /// Append the low `count` bits of `value`, most significant first.
  void append(uint128 value, unsigned count);
  void append(const BitString& other);

  [[nodiscard]] bool operator[](std::size_t i) const noexcept { return ((bytes_[i / 8] >> (7 - i % 8)) & 1U) != 0; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
  [[nodiscard]] const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  [[nodiscard]] std::string to_string() const;
  static BitString from_string(const std::string& bits);

  friend bool operator==(const BitString& a, const BitString& b) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const BitString& bits) : bits_{&bits} {}
  bool read();
  uint128 read(unsigned count);
  [[nodiscard]] std::size_t position() const noexcept { return pos_; }
  [[nodiscard]] bool exhausted() const noexcept { return pos_ >= bits_->size(); }

 private:
  const BitString* bits_;
  std::size_t pos_ = 0;
};

enum class CoderKind { kZipf, kEliasDelta };

/**
 * Prefix code for positive integers.
 *
 * The Zipf kind assigns k the length ceil(s·log2 k + log2 zeta(s)) + 1 and
 * realizes those lengths as a canonical code. The lengths sum to at most 1/2
 * in the Kraft sense, so the canonical assignment always exists.
 */
class IndexCoder {
 public:
  static IndexCoder zipf(double exponent);
  static IndexCoder elias_delta();
  /// 1 + 1 / (rate_estimate_bits + 1 + log2(e)/e).
  static double default_zipf_exponent(double rate_estimate_bits);

  [[nodiscard]] CoderKind kind() const noexcept { return kind_; }
  [[nodiscard]] double zipf_exponent() const noexcept { return exponent_; }

  [[nodiscard]] unsigned code_length(std::uint64_t k) const;
  void encode(std::uint64_t k, BitString& out) const;
  [[nodiscard]] BitString encode(std::uint64_t k) const;
  std::uint64_t decode(BitReader& in) const;

 private:
  static constexpr unsigned kMaxZipfLength = 127;

  struct LengthClass {
    unsigned length;
    std::uint64_t first_k;
    std::uint64_t last_k;
    uint128 first_code;
  };

  IndexCoder(CoderKind kind, double exponent);
  [[nodiscard]] unsigned zipf_raw_length(std::uint64_t k) const;
  [[nodiscard]] const LengthClass& zipf_class(std::uint64_t k) const;

  CoderKind kind_;
  double exponent_ = 0.0;
  double log2_zeta_ = 0.0;
  std::vector<LengthClass> classes_;
};

}  // namespace iscsim

#endif  // ISCSIM_INDEX_CODER_HPP
