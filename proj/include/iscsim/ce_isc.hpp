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

#ifndef ISCSIM_CE_ISC_HPP
#define ISCSIM_CE_ISC_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "iscsim/exponential_race.hpp"
#include "iscsim/index_coder.hpp"
#include "iscsim/probability_model.hpp"
#include "iscsim/stats.hpp"

/**
 * \file
 * \brief One-shot channel simulation by importance sampling with rank coding.
 *
 * The encoder races the pool against the target, transmits the rank K of the
 * winner's exponential among all S_i, and the decoder inverts the rank.
 */

namespace iscsim {

/// 1 + log2(e)/e, the additive constant of the expected log-rank bound.
inline constexpr double kRankDelta = 1.0 + std::numbers::log2e / std::numbers::e;

struct EncodeResult {
  Selection selection;
  std::uint64_t rank = 0;
  BitString bits;
  /// D(lambda || uniform) in bits for this pool.
  double kl_lambda_uniform_bits = 0.0;
};

struct DecodeResult {
  std::uint64_t rank = 0;
  std::uint64_t index = 0;
  Point sample;
};

/// Race, softmax statistics and rank in two streaming passes.
template <RacePool Pool, class LogWeight>
EncodeResult encode_with(const Pool& pool, LogWeight&& log_weight, const IndexCoder& coder) {
  RaceArgmin argmin;
  LogSumExp lse;
  const std::uint64_t n = pool.size();
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double lw = log_weight(pool.sample(i));
    argmin.offer(i, pool.exponential(i), lw);
    lse.add(lw);
  }
  EncodeResult out;
  out.selection = argmin.selection();
  out.rank = rank_of(pool, out.selection);
  out.selection.rank = out.rank;
  out.kl_lambda_uniform_bits =
      std::max(0.0, std::log2(static_cast<double>(n)) + (lse.softmax_mean() - lse.value()) * std::numbers::log2e);
  coder.encode(out.rank, out.bits);
  return out;
}

EncodeResult encode(const ProposalPool& pool, const ProbabilityModel& target, const IndexCoder& coder);

/// Inverse of encode; throws DecodeError on malformed input or a rank outside 1..N.
template <RacePool Pool>
DecodeResult decode_with(const BitString& bits, const Pool& pool, const IndexCoder& coder) {
  BitReader reader(bits);
  const std::uint64_t k = coder.decode(reader);
  if (!reader.exhausted()) throw DecodeError("trailing bits after the rank codeword");
  if (k > pool.size()) throw DecodeError("decoded rank exceeds the pool size");
  DecodeResult out;
  out.rank = k;
  out.index = index_of_rank(pool, k);
  out.sample = pool.sample(out.index);
  return out;
}

DecodeResult decode(const BitString& bits, const ProposalPool& pool, const IndexCoder& coder);

struct RateStats {
  double mean_log2_k = 0.0;
  double mean_log2_k_std_err = 0.0;
  double entropy_k_bits = 0.0;
  double mean_code_length = 0.0;
  double mean_code_length_std_err = 0.0;
  double mean_kl_lambda_uniform_bits = 0.0;
  double mean_kl_lambda_uniform_std_err = 0.0;
  std::uint64_t trials = 0;
};

class RateAccumulator {
 public:
  void add(const EncodeResult& r);
  void merge(const RateAccumulator& other);
  [[nodiscard]] RateStats finish() const;

 private:
  stats::RunningStats log2_k_;
  stats::RunningStats code_length_;
  stats::RunningStats kl_;
  std::map<std::uint64_t, std::uint64_t> histogram_;
};

// ---------------------------------------------------------------------------
// Output distribution diagnostics

/// Upper bound omega = sup target/proposal for scalar Gaussians; +inf unless the target is narrower.
double gaussian_log_omega(const GaussianModel& target, const GaussianModel& proposal);

/// Closed-form D(target || proposal) in bits for scalar Gaussians.
double gaussian_kl_bits(const GaussianModel& target, const GaussianModel& proposal);

/**
 * Exact sampler of the selected Y_U for a ratio bounded by omega.
 *
 * Walks the order statistics S_(1) < S_(2) < ... of N exponentials through
 * their spacing representation, attaching a fresh proposal draw to each, and
 * stops once S_(k)/omega can no longer beat the best score. The output law is
 * that of the full race; the work is independent of N.
 */
struct EarlyStopDraw {
  Point sample;
  std::uint64_t rank = 0;  ///< rank of the winner among the S_i
  std::uint64_t steps = 0;
};

EarlyStopDraw early_stop_select(const RandomStream& stream, std::uint64_t pool_size, const ProbabilityModel& proposal,
                                const std::function<double(const Point&)>& log_weight, double log_omega);

enum class TvEngine { kAuto, kStreaming, kEarlyStop };

struct TvOptions {
  std::uint64_t trials = 100000;
  std::size_t bins = 128;  ///< equal-probability bins under the target
  std::uint64_t reference_samples = 0;  ///< 0 means the same as trials
  std::uint64_t bootstrap_replicates = 200;
  std::uint64_t seed = 1;
  TvEngine engine = TvEngine::kAuto;
  std::uint64_t streaming_limit = 1ULL << 14;  ///< kAuto streams only up to this pool size
};

struct TvEstimate {
  double tv = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// TV between two independent target samples of the same sizes.
  double noise_floor = 0.0;
  bool underpopulated = false;
  TvEngine engine_used = TvEngine::kStreaming;
  std::uint64_t trials = 0;
  std::vector<double> simulated_samples;  ///< Y_U per trial, kept for downstream tests
};

/// Histogram TV between simulated Y_U and i.i.d. target draws, with a bias-shifted percentile bootstrap CI.
TvEstimate proxy_tv_estimate(const GaussianModel& target, const GaussianModel& proposal, std::uint64_t pool_size,
                             const TvOptions& options);

/// Exact TV of two scalar Gaussians restricted to the given histogram edges.
double binned_gaussian_tv(const GaussianModel& a, const GaussianModel& b, std::span<const double> inner_edges);

/// Inner edges of `bins` equal-probability bins under `model`.
std::vector<double> equal_probability_edges(const GaussianModel& model, std::size_t bins);

struct N0Bound {
  double t = 0.0;
  double log2_n = 0.0;
  double residual = 0.0;  ///< g(t) - epsilon at the returned t
  bool clamped = false;   ///< epsilon above the achievable range; t held at its lower limit
  /// ceil(2^log2_n), or nullopt above 2^63.
  [[nodiscard]] std::optional<std::uint64_t> pool_size() const;
};

/// Two-term tail function g(t) whose root defines the N0 construction.
double n0_tail(double t, double omega);

N0Bound n0_bound(double dkl_bits, double omega, double epsilon);

// ---------------------------------------------------------------------------
// Rate bounds

struct RateBoundReport {
  double log_rank_bits = 0.0;
  double rank_entropy_bits = std::numeric_limits<double>::quiet_NaN();
  double rank_entropy_alt_bits = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double alpha_n = 0.0;
  double beta_n = 0.0;
  bool moments_available = false;
};

/// alpha = 2(w-1) + 2 sqrt(w-1) (d3 - d2^2)^{1/2} + 4 w d2, with d_n taken as d_n(p_Y || p_{Y|X}).
double alpha_term(double omega, double d2, double d3);
/// Delta = 6 (w-1) log2 w + E_X[alpha].
double delta_constant(double omega, double mean_alpha);
double bound_expected_log_rank(double mean_kl_lambda_uniform_bits);
double bound_rank_entropy(double mutual_information_bits, double delta, double pool_size);
double alt_alpha_n(double pool_size, double epsilon);
double alt_beta_n(double pool_size, double epsilon, double omega);
double bound_rank_entropy_alt(double mutual_information_bits, double pool_size, double epsilon, double omega);

struct RateBoundInputs {
  double mean_kl_lambda_uniform_bits = 0.0;
  double mutual_information_bits = 0.0;
  double omega = 1.0;
  double mean_alpha = std::numeric_limits<double>::quiet_NaN();  ///< NaN or inf: moments unavailable
  double pool_size = 1.0;
  double epsilon = 0.1;
};

RateBoundReport rate_bounds(const RateBoundInputs& in);

/**
 * Monte-Carlo E over pools of D(lambda || uniform) in bits for one target and
 * proposal; pools are drawn from `stream.child(t)`.
 */
stats::RunningStats mean_kl_lambda_uniform(const RandomStream& stream, std::uint64_t pool_size,
                                           std::shared_ptr<const ProbabilityModel> proposal,
                                           const ProbabilityModel& target, std::uint64_t pools);

}  // namespace iscsim

#endif  // ISCSIM_CE_ISC_HPP
