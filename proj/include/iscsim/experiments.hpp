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

#ifndef ISCSIM_EXPERIMENTS_HPP
#define ISCSIM_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace iscsim::experiments {

enum class Kind { kChannelSim, kMatchProb, kRdCurve, kFeedbackSweep, kMis, kBounds };

std::string to_string(Kind kind);
std::optional<Kind> kind_from_string(const std::string& name);
const std::vector<std::string>& kind_names();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Flat `key = value` configuration. `#` starts a comment, lists are
 * comma-separated, and each key may appear once.
 */
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }
  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }
  [[nodiscard]] int line_of(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  [[nodiscard]] std::vector<std::uint64_t> get_uints(const std::string& key,
                                                     const std::vector<std::uint64_t>& fallback) const;
  [[nodiscard]] std::vector<std::string> get_strings(const std::string& key,
                                                     const std::vector<std::string>& fallback) const;

  /// Digest of the canonical (sorted) key/value set.
  [[nodiscard]] std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

/// All violated constraints of `config` for `kind`; never runs trials.
std::vector<std::string> validate(Kind kind, const Config& config);

struct RunResult {
  std::vector<std::filesystem::path> files;
};

/// Validates, runs, and writes the CSV artifacts. Throws ConfigError on invalid configs.
RunResult run(Kind kind, const Config& config, const RunOptions& options, std::ostream& log);

}  // namespace iscsim::experiments

#endif  // ISCSIM_EXPERIMENTS_HPP
