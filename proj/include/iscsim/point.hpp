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

#ifndef ISCSIM_POINT_HPP
#define ISCSIM_POINT_HPP

#include <array>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace iscsim {

/// Small fixed-capacity real vector. Pool elements are created per index in
/// hot loops, so points never allocate.
class Point {
 public:
  static constexpr std::size_t kMaxDim = 8;

  constexpr Point() = default;
  constexpr explicit Point(std::size_t dim) : dim_{dim} { assert(dim <= kMaxDim); }
  constexpr Point(std::initializer_list<double> values) : dim_{values.size()} {
    assert(values.size() <= kMaxDim);
    std::size_t i = 0;
    for (double v : values) data_[i++] = v;
  }

  /// Scalar point.
  static constexpr Point scalar(double x) { return Point{x}; }

  [[nodiscard]] constexpr std::size_t dim() const noexcept { return dim_; }
  constexpr double& operator[](std::size_t i) noexcept { return data_[i]; }
  constexpr double operator[](std::size_t i) const noexcept { return data_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return {data_.data(), dim_}; }

  friend constexpr bool operator==(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i) {
      if (a.data_[i] != b.data_[i]) return false;
    }
    return true;
  }

 private:
  std::array<double, kMaxDim> data_{};
  std::size_t dim_ = 0;
};

}  // namespace iscsim

#endif  // ISCSIM_POINT_HPP
