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

#ifndef ISCSIM_STATS_HPP
#define ISCSIM_STATS_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace iscsim::stats {

/// Mergeable mean/variance accumulator (Chan et al. parallel update).
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  void merge(const RunningStats& other) noexcept;

  [[nodiscard]] std::uint64_t count() const noexcept { return n_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  /// Unbiased sample variance.
  [[nodiscard]] double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  [[nodiscard]] double std_err() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

/// Plug-in (maximum-likelihood) entropy in bits of a histogram of counts.
double plugin_entropy_bits(const std::map<std::uint64_t, std::uint64_t>& counts);
double plugin_entropy_bits(std::span<const std::uint64_t> counts);

/// Upper-tail p-value of Pearson's chi-square statistic.
double chi_square_p_value(double statistic, double degrees_of_freedom);

struct ChiSquareResult {
  double statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
};

/// Goodness of fit of observed counts to expected cell probabilities.
/// Cells with expected count below `min_expected` are pooled into their neighbour.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probabilities,
                               double min_expected = 5.0);

/// Asymptotic Kolmogorov distribution tail Q_KS(lambda).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value with the Stephens correction).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Histogram bin index for sorted inner edges: bin j covers [edges[j-1], edges[j]).
std::size_t bin_of(std::span<const double> inner_edges, double x);

}  // namespace iscsim::stats

#endif  // ISCSIM_STATS_HPP
