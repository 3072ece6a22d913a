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

#ifndef ISCSIM_CSV_HPP
#define ISCSIM_CSV_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace iscsim::csv {

/// Shortest decimal text that parses back to exactly `x`; "inf", "-inf", "nan" otherwise.
std::string format_number(double x);
std::string format_number(std::uint64_t x);

/// Joins already-formatted fields with commas; fields containing commas or quotes are quoted.
std::string join(const std::vector<std::string>& fields);

/// FNV-1a 64-bit digest rendered as 16 hex digits.
std::string digest_hex(std::string_view text);

}  // namespace iscsim::csv

#endif  // ISCSIM_CSV_HPP
