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

#include "iscsim/index_coder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/zeta.hpp>

namespace iscsim {

void BitString::push_back(bool bit) {
  if (size_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(1U << (7 - size_ % 8));
  ++size_;
}

void BitString::append(uint128 value, unsigned count) {
  for (unsigned j = count; j-- > 0;) push_back(((value >> j) & 1U) != 0);
}

void BitString::append(const BitString& other) {
  for (std::size_t i = 0; i < other.size(); ++i) push_back(other[i]);
}

std::string BitString::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*this)[i]) s[i] = '1';
  }
  return s;
}

BitString BitString::from_string(const std::string& bits) {
  BitString out;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("BitString: expected only '0' and '1'");
    out.push_back(c == '1');
  }
  return out;
}

bool BitReader::read() {
  if (pos_ >= bits_->size()) throw DecodeError("bit string ended inside a codeword");
  return (*bits_)[pos_++];
}

uint128 BitReader::read(unsigned count) {
  uint128 v = 0;
  for (unsigned j = 0; j < count; ++j) v = (v << 1U) | static_cast<unsigned>(read());
  return v;
}

IndexCoder IndexCoder::elias_delta() { return {CoderKind::kEliasDelta, 0.0}; }

IndexCoder IndexCoder::zipf(double exponent) {
  if (!(exponent > 1.0) || !std::isfinite(exponent)) throw std::invalid_argument("zipf exponent must exceed 1");
  return {CoderKind::kZipf, exponent};
}

double IndexCoder::default_zipf_exponent(double rate_estimate_bits) {
  if (!(rate_estimate_bits >= 0.0)) throw std::invalid_argument("rate estimate must be nonnegative");
  const double delta = 1.0 + std::numbers::log2e / std::numbers::e;
  return 1.0 + 1.0 / (rate_estimate_bits + delta);
}

IndexCoder::IndexCoder(CoderKind kind, double exponent) : kind_{kind}, exponent_{exponent} {
  if (kind_ != CoderKind::kZipf) return;
  log2_zeta_ = std::log2(boost::math::zeta(exponent_));

  constexpr auto kMaxK = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t next_k = 1;
  uint128 next_code = 0;
  unsigned prev_length = 0;
  for (unsigned len = zipf_raw_length(1); len <= kMaxZipfLength; ++len) {
    // Largest k whose length is <= len, from the closed form then nudged to
    // agree exactly with zipf_raw_length.
    const double bound = std::exp2((static_cast<double>(len) - 1.0 - log2_zeta_) / exponent_);
    std::uint64_t last = bound >= 0x1.0p64 ? kMaxK : static_cast<std::uint64_t>(bound);
    last = std::max(last, next_k - 1);
    while (last >= next_k && zipf_raw_length(last) > len) --last;
    while (last < kMaxK && zipf_raw_length(last + 1) <= len) ++last;
    if (last < next_k) continue;

    next_code <<= (prev_length == 0 ? 0U : len - prev_length);
    classes_.push_back({len, next_k, last, next_code});
    next_code += static_cast<uint128>(last - next_k) + 1;
    prev_length = len;
    if (last == kMaxK) break;
    next_k = last + 1;
  }
}

unsigned IndexCoder::zipf_raw_length(std::uint64_t k) const {
  const double ideal = exponent_ * std::log2(static_cast<double>(k)) + log2_zeta_;
  return static_cast<unsigned>(std::max(0.0, std::ceil(ideal))) + 1;
}

const IndexCoder::LengthClass& IndexCoder::zipf_class(std::uint64_t k) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), k,
                                   [](const LengthClass& c, std::uint64_t key) { return c.last_k < key; });
  if (it == classes_.end()) throw std::out_of_range("index exceeds the zipf code table");
  return *it;
}

unsigned IndexCoder::code_length(std::uint64_t k) const {
  if (k == 0) throw std::invalid_argument("code_length: k must be >= 1");
  if (kind_ == CoderKind::kEliasDelta) {
    const auto n = static_cast<unsigned>(std::bit_width(k));  // floor(log2 k) + 1
    const auto l = static_cast<unsigned>(std::bit_width(n)) - 1;
    return (n - 1) + 2 * l + 1;
  }
  return zipf_class(k).length;
}

void IndexCoder::encode(std::uint64_t k, BitString& out) const {
  if (k == 0) throw std::invalid_argument("encode: k must be >= 1");
  if (kind_ == CoderKind::kEliasDelta) {
    const auto n = static_cast<unsigned>(std::bit_width(k));
    const auto l = static_cast<unsigned>(std::bit_width(n)) - 1;
    out.append(0, l);
    out.append(n, l + 1);
    out.append(k, n - 1);
    return;
  }
  const LengthClass& c = zipf_class(k);
  out.append(c.first_code + (k - c.first_k), c.length);
}

BitString IndexCoder::encode(std::uint64_t k) const {
  BitString out;
  encode(k, out);
  return out;
}

std::uint64_t IndexCoder::decode(BitReader& in) const {
  if (kind_ == CoderKind::kEliasDelta) {
    unsigned l = 0;
    while (!in.read()) {
      if (++l > 6) throw DecodeError("elias-delta prefix too long");
    }
    const auto n = static_cast<unsigned>((static_cast<uint128>(1) << l) | in.read(l));
    if (n > 64) throw DecodeError("elias-delta length field exceeds 64 bits");
    return static_cast<std::uint64_t>((static_cast<uint128>(1) << (n - 1)) | in.read(n - 1));
  }
  uint128 v = 0;
  unsigned len = 0;
  for (const LengthClass& c : classes_) {
    while (len < c.length) {
      v = (v << 1U) | static_cast<unsigned>(in.read());
      ++len;
    }
    const uint128 count = static_cast<uint128>(c.last_k - c.first_k) + 1;
    if (v >= c.first_code && v - c.first_code < count) {
      return c.first_k + static_cast<std::uint64_t>(v - c.first_code);
    }
  }
  throw DecodeError("bit pattern is not a zipf codeword");
}

}  // namespace iscsim
