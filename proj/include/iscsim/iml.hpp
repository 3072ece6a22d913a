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

#ifndef ISCSIM_IML_HPP
#define ISCSIM_IML_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iscsim/exponential_race.hpp"
#include "iscsim/probability_model.hpp"
#include "iscsim/stats.hpp"

/**
 * \file
 * \brief Two exponential races over one shared pool, and bounds on their disagreement.
 *
 * Notation: p and q are the two targets, p_Y the proposal, and for a pool
 * element y, lambda(y) = p(y)/p_Y(y) and beta(y) = q(y)/p_Y(y).
 */

namespace iscsim {

struct PairedSelection {
  std::uint64_t u_p = 0;
  std::uint64_t u_q = 0;
  bool matched = false;
  Selection p;
  Selection q;
};

/// Both races in one pass over the same (S_i, Y_i).
template <RacePool Pool, class LogWeightP, class LogWeightQ>
PairedSelection paired_race(const Pool& pool, LogWeightP&& log_weight_p, LogWeightQ&& log_weight_q) {
  RaceArgmin ap;
  RaceArgmin aq;
  const std::uint64_t n = pool.size();
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double s = pool.exponential(i);
    const Point y = pool.sample(i);
    ap.offer(i, s, log_weight_p(y));
    aq.offer(i, s, log_weight_q(y));
  }
  PairedSelection out;
  out.p = ap.selection();
  out.q = aq.selection();
  out.u_p = out.p.index;
  out.u_q = out.q.index;
  out.matched = out.u_p == out.u_q;
  return out;
}

PairedSelection paired_select(const ProposalPool& pool, const ProbabilityModel& target_p,
                              const ProbabilityModel& target_q);

/// Same mechanics with the decoder's model Q_{Y|Z}(.|z) in place of q.
PairedSelection conditional_paired_select(const ProposalPool& pool, const ProbabilityModel& target_p,
                                          const ProbabilityModel& decoder_q);

class MatchStats {
 public:
  void add(bool mismatch) noexcept {
    ++trials_;
    mismatches_ += mismatch ? 1 : 0;
  }
  void merge(const MatchStats& other) noexcept {
    trials_ += other.trials_;
    mismatches_ += other.mismatches_;
  }
  [[nodiscard]] std::uint64_t trials() const noexcept { return trials_; }
  [[nodiscard]] std::uint64_t mismatches() const noexcept { return mismatches_; }
  [[nodiscard]] double p_hat() const noexcept {
    return trials_ == 0 ? 0.0 : static_cast<double>(mismatches_) / static_cast<double>(trials_);
  }
  [[nodiscard]] stats::Interval wilson() const { return stats::wilson_interval(mismatches_, trials_); }
  /// Binomial standard error sqrt(p(1-p)/n).
  [[nodiscard]] double std_err() const noexcept;

 private:
  std::uint64_t trials_ = 0;
  std::uint64_t mismatches_ = 0;
};

struct PoolConfig {
  std::uint64_t seed = 1;
  std::uint64_t size = 1;
  std::shared_ptr<const ProbabilityModel> proposal;
};

/// Fraction of trials with U_p != U_q; trial t races over the pool keyed by stream child t.
MatchStats mismatch_mc(const PoolConfig& config, const ProbabilityModel& target_p, const ProbabilityModel& target_q,
                       std::uint64_t trials, unsigned threads = 1);

// ---------------------------------------------------------------------------
// d_n(p || q) = E_{Y ~ p}[(p(Y)/q(Y))^{n-1}]

enum class MomentMethod { kMonteCarlo, kAnalytic };

struct MomentEstimate {
  int order = 2;
  double value = 1.0;
  double std_err = 0.0;
  std::uint64_t samples = 0;
  MomentMethod method = MomentMethod::kAnalytic;
  bool infinite = false;
};

/// Closed form for scalar Gaussians; +inf when the integrand is not integrable.
MomentEstimate d_moment_gaussian(const GaussianModel& p, const GaussianModel& q, int n);

/// Exact finite sum for categorical laws on a common alphabet.
MomentEstimate d_moment_discrete(std::span<const double> p, std::span<const double> q, int n);

/**
 * Monte-Carlo estimate with samples drawn from p in ten batches.
 *
 * Flags `infinite` when the largest single term carries over 20% of the sum,
 * or over 5% while still setting records in two of the last five batches.
 */
MomentEstimate d_moment_mc(const ProbabilityModel& p, const ProbabilityModel& q, int n, std::uint64_t samples,
                           const RandomStream& stream);

// ---------------------------------------------------------------------------
// Mismatch bounds

/**
 * Bound on Pr(U_p != U_q | pool, U_p = k):
 * 1 - (1 + p(y_k)/q(y_k) * mean_j beta(y_j) / mean_j lambda(y_j))^{-1}.
 * k is one-based. Evaluated in the log domain.
 */
double pool_conditional_bound(std::span<const Point> pool_samples, std::uint64_t k, const ProbabilityModel& target_p,
                              const ProbabilityModel& target_q, const ProbabilityModel& proposal);

/// The same bound from per-element log-ratios ln lambda(y_j), ln beta(y_j).
double pool_conditional_bound(std::span<const double> log_lambda, std::span<const double> log_beta, std::uint64_t k);

struct MatchingMuInputs {
  double lambda = 1.0;  ///< p(y_k)/p_Y(y_k)
  double beta = 1.0;    ///< q(y_k)/p_Y(y_k)
  double omega = 1.0;
  double d3 = 1.0;  ///< d_3(p_Y || p)
  double d5 = 1.0;  ///< d_5(p_Y || p)
  std::uint64_t pool_size = 2;
};

struct MatchingMuResult {
  double first_term = 1.0;  ///< (beta/Nb + 1)/(lambda/Nb + 1), the large-pool limit part
  double k_term = 0.0;
  double l_term = 0.0;
  double mu = 1.0;
  double bound = 0.5;  ///< 1 - (1 + (lambda/beta) mu)^{-1}
  bool finite = true;
};

/// Finite-pool bound on Pr(U_p != U_q | Y_k = y_k, U_p = k); Nb = N - 1, requires N >= 2.
MatchingMuResult matching_mu(const MatchingMuInputs& in);

/**
 * Alternative finite-pool form:
 * mu' = (Nb + lambda)[(beta + Nb(1+eps)) / (lambda + Nb(1-eps))^2 + (N w / lambda^2) 2 exp(-Nb eps^2 / w^2)].
 */
MatchingMuResult matching_mu_alt(double lambda, double beta, double omega, std::uint64_t pool_size, double epsilon);

/// 1 - (1 + ratio * mu)^{-1} clamped to [0, 1], with the limits ratio*mu -> 0 and -> inf handled.
double mismatch_bound_from_mu(double ratio, double mu);

struct BoundReport {
  std::string variant;
  std::uint64_t pool_size = 0;
  double omega = 1.0;
  double d2 = 1.0;
  double d3 = 1.0;
  double d5 = 1.0;
  double mu = 1.0;
  double bound = 0.0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

std::string bound_report_csv_header();
std::string to_csv_row(const BoundReport& r);

}  // namespace iscsim

#endif  // ISCSIM_IML_HPP
