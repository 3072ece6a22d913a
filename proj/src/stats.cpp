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

#include "iscsim/stats.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace iscsim::stats {

void RunningStats::merge(const RunningStats& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const auto na = static_cast<double>(n_);
  const auto nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double plugin_entropy_bits(std::span<const std::uint64_t> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

double plugin_entropy_bits(const std::map<std::uint64_t, std::uint64_t>& counts) {
  std::vector<std::uint64_t> flat;
  flat.reserve(counts.size());
  for (const auto& [key, c] : counts) flat.push_back(c);
  return plugin_entropy_bits(flat);
}

double chi_square_p_value(double statistic, double degrees_of_freedom) {
  if (degrees_of_freedom <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * degrees_of_freedom, 0.5 * statistic);
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probabilities,
                               double min_expected) {
  if (observed.size() != expected_probabilities.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: size mismatch");
  }
  double total = 0.0;
  for (auto c : observed) total += static_cast<double>(c);
  double prob_total = 0.0;
  for (double p : expected_probabilities) prob_total += p;

  // Pool adjacent cells left to right until every pooled cell is large enough.
  std::vector<double> obs_cells;
  std::vector<double> exp_cells;
  double acc_obs = 0.0;
  double acc_exp = 0.0;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    acc_obs += static_cast<double>(observed[j]);
    acc_exp += total * expected_probabilities[j] / prob_total;
    if (acc_exp >= min_expected) {
      obs_cells.push_back(acc_obs);
      exp_cells.push_back(acc_exp);
      acc_obs = 0.0;
      acc_exp = 0.0;
    }
  }
  if (acc_exp > 0.0 || acc_obs > 0.0) {
    if (exp_cells.empty()) {
      obs_cells.push_back(acc_obs);
      exp_cells.push_back(acc_exp);
    } else {
      obs_cells.back() += acc_obs;
      exp_cells.back() += acc_exp;
    }
  }
  ChiSquareResult r;
  for (std::size_t j = 0; j < obs_cells.size(); ++j) {
    const double d = obs_cells[j] - exp_cells[j];
    r.statistic += d * d / exp_cells[j];
  }
  r.degrees_of_freedom = static_cast<double>(obs_cells.size()) - 1.0;
  r.p_value = chi_square_p_value(r.statistic, r.degrees_of_freedom);
  return r;
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

std::size_t bin_of(std::span<const double> inner_edges, double x) {
  return static_cast<std::size_t>(std::upper_bound(inner_edges.begin(), inner_edges.end(), x) - inner_edges.begin());
}

}  // namespace iscsim::stats
