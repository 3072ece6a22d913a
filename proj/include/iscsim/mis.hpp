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

#ifndef ISCSIM_MIS_HPP
#define ISCSIM_MIS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "iscsim/exponential_race.hpp"
#include "iscsim/gaussian_models.hpp"

/**
 * \file
 * \brief Exponential races over stratified (non-i.i.d.) pools and the sorted-exponential baseline.
 */

namespace iscsim {

/// Y_1..Y_{N/2} from the first proposal, Y_{N/2+1}..Y_N from the second.
class StratifiedPool {
 public:
  StratifiedPool(RandomStream stream, std::uint64_t size, std::shared_ptr<const ProbabilityModel> first,
                 std::shared_ptr<const ProbabilityModel> second);

  [[nodiscard]] std::uint64_t size() const noexcept { return size_; }
  [[nodiscard]] double exponential(std::uint64_t i) const noexcept { return exp_stream_.exponential(i); }
  [[nodiscard]] Point sample(std::uint64_t i) const {
    return (i <= size_ / 2 ? first_ : second_)->sample(sample_stream_, i);
  }

 private:
  RandomStream exp_stream_;
  RandomStream sample_stream_;
  std::uint64_t size_;
  std::shared_ptr<const ProbabilityModel> first_;
  std::shared_ptr<const ProbabilityModel> second_;
};

/// Race with weights target / mixture, the mixture being the average of the stratum proposals.
template <RacePool Pool>
Selection mis_select(const Pool& pool, const ProbabilityModel& target, const ProbabilityModel& mixture) {
  return select_index(pool, log_ratio(target, mixture));
}

/**
 * Sorted-exponential baseline: the k-th smallest of the pool's exponentials,
 * built from its spacings S_(k) = sum_{j<=k} E_j/(N-j+1), is paired with
 * sample k, and the race runs on S_(k)/w_k. The returned index is k; the
 * raw_exponential field holds S_(k).
 */
template <RacePool Pool, class LogWeight>
Selection orc_select(const Pool& pool, LogWeight&& log_weight) {
  RaceArgmin argmin;
  const std::uint64_t n = pool.size();
  double s = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    s += pool.exponential(k) / static_cast<double>(n - k + 1);
    argmin.offer(k, s, log_weight(pool.sample(k)));
  }
  Selection sel = argmin.selection();
  sel.rank = sel.index;
  return sel;
}

template <RacePool Pool>
Selection orc_select(const Pool& pool, const ProbabilityModel& target, const ProbabilityModel& weight_proposal) {
  return orc_select(pool, log_ratio(target, weight_proposal));
}

struct MisRow {
  std::string scheme;
  std::uint64_t pool_size = 0;
  double mean_dist = 0.0;
  double var_dist = 0.0;
  double rate_bits = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double max_abs_error = 0.0;
};

struct MisSettings {
  double offset = 512.0;
  double noise_variance = 1.0;
  std::uint64_t trials = 1ULL << 14;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/**
 * For each N: the rank-coded race over a stratified pool ("ce-is") and the
 * sorted-exponential baseline over an i.i.d. mixture pool ("orc"), with
 * paired exponential streams. Distortion is (Y - X)^2; rate is the plug-in
 * entropy of the transmitted integer (rank for ce-is, index for orc).
 */
std::vector<MisRow> mis_experiment(const std::vector<std::uint64_t>& pool_sizes, const MisSettings& settings);

std::string mis_results_csv_header();
std::string to_csv_row(const MisRow& row);

}  // namespace iscsim

#endif  // ISCSIM_MIS_HPP
