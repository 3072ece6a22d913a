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

#ifndef ISCSIM_WYNER_ZIV_HPP
#define ISCSIM_WYNER_ZIV_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "iscsim/exponential_race.hpp"
#include "iscsim/gaussian_models.hpp"
#include "iscsim/stats.hpp"

/**
 * \file
 * \brief Lossy compression with side information at the decoder.
 *
 * The encoder races the pool against p_{W|V}(.|v) and sends the bin label of
 * the winner. The decoder races the same pool, restricted to that bin,
 * against p_{W|T}(.|t). An optional feedback round repairs disagreements.
 */

namespace iscsim {

class EmptyBinError : public std::runtime_error {
 public:
  EmptyBinError() : std::runtime_error("empty bin: no pool element carries the received label") {}
};

/// Models, distortion and reconstruction of a side-information problem.
class SideInfoProblem {
 public:
  virtual ~SideInfoProblem() = default;

  [[nodiscard]] virtual std::size_t dim() const = 0;
  /// p_W, the proposal shared by encoder and decoder.
  [[nodiscard]] virtual std::shared_ptr<const ProbabilityModel> marginal_w() const = 0;
  /// ln p_{W|V}(w|v) - ln p_W(w).
  [[nodiscard]] virtual double encoder_log_weight(const Point& w, const Point& v) const = 0;
  /// ln p_{W|T}(w|t) - ln p_W(w); may come from any pluggable estimator.
  [[nodiscard]] virtual double decoder_log_weight(const Point& w, const Point& t) const = 0;
  /// i(w; v | t) in bits.
  [[nodiscard]] virtual double info_density_bits(const Point& w, const Point& v, const Point& t) const = 0;
  /// Per-sample distortion d(v, v_hat).
  [[nodiscard]] virtual double distortion(const Point& v, const Point& v_hat) const = 0;
  /// Reconstruction g(w, t).
  [[nodiscard]] virtual Point reconstruct(const Point& w, const Point& t) const = 0;
  /// Estimate of V from T alone.
  [[nodiscard]] virtual Point side_info_estimate(const Point& t) const = 0;
  virtual void sample_source(const RandomStream& stream, std::uint64_t i, Point& v, Point& t) const = 0;
  [[nodiscard]] virtual Point sample_w_given_v(const RandomStream& stream, std::uint64_t i, const Point& v) const = 0;
};

/// The Gaussian chain with squared-error distortion averaged over coordinates.
class GaussianSideInfoProblem final : public SideInfoProblem {
 public:
  explicit GaussianSideInfoProblem(GaussianWZ model);

  [[nodiscard]] const GaussianWZ& model() const noexcept { return model_; }
  [[nodiscard]] std::size_t dim() const override { return model_.dim(); }
  [[nodiscard]] std::shared_ptr<const ProbabilityModel> marginal_w() const override { return marginal_; }
  [[nodiscard]] double encoder_log_weight(const Point& w, const Point& v) const override {
    return model_.encoder_log_weight(w, v);
  }
  [[nodiscard]] double decoder_log_weight(const Point& w, const Point& t) const override {
    return model_.decoder_log_weight(w, t);
  }
  [[nodiscard]] double info_density_bits(const Point& w, const Point& v, const Point& t) const override {
    return model_.info_density_bits(w, v, t);
  }
  [[nodiscard]] double distortion(const Point& v, const Point& v_hat) const override;
  [[nodiscard]] Point reconstruct(const Point& w, const Point& t) const override { return model_.ivw_fuse(w, t); }
  [[nodiscard]] Point side_info_estimate(const Point& t) const override;
  void sample_source(const RandomStream& stream, std::uint64_t i, Point& v, Point& t) const override {
    model_.sample_source(stream, i, v, t);
  }
  [[nodiscard]] Point sample_w_given_v(const RandomStream& stream, std::uint64_t i, const Point& v) const override {
    return model_.sample_w_given_v(stream, i, v);
  }

 private:
  GaussianWZ model_;
  std::shared_ptr<const ProbabilityModel> marginal_;
};

struct SideInfoEncoding {
  Selection selection;
  std::uint64_t label = 1;  ///< bin label in 1..L
};

SideInfoEncoding encode_side_info(const SideInfoProblem& problem, const ProposalPool& pool, const Point& v);

/// argmin over {i : l_i = label} of the decoder race; throws EmptyBinError if the bin is empty.
Selection decode_side_info(const SideInfoProblem& problem, const ProposalPool& pool, const Point& t,
                           std::uint64_t label);

/**
 * Decoder race over indices whose bin label is `label` and whose MSB
 * ((i-1)/L) is congruent to `msb_residue` modulo `msb_modulus`.
 */
Selection decode_side_info_refined(const SideInfoProblem& problem, const ProposalPool& pool, const Point& t,
                                   std::uint64_t label, std::uint64_t msb_modulus, std::uint64_t msb_residue);

struct BoundEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t samples = 0;
};

/**
 * Monte-Carlo mean over (V, W, T) of 1 - (1 + (1+eps)/L 2^{i(W;V|T)})^{-1},
 * with W ~ p_{W|V}. For k-sample blocks pass L = 2^{kR}.
 */
BoundEstimate side_info_mismatch_bound(const SideInfoProblem& problem, double bins, double epsilon,
                                       std::uint64_t samples, const RandomStream& stream);

/// Mean of 1 - 1{d(V, g(W,T)) <= D} (1 + (1+eps)/L 2^{i})^{-1}.
BoundEstimate excess_distortion_bound(const SideInfoProblem& problem, double max_distortion, double bins,
                                      double epsilon, std::uint64_t samples, const RandomStream& stream);

// ---------------------------------------------------------------------------
// Decision feedback

enum class FeedbackMode { kNone, kFull, kPartial, kHashed };

std::string to_string(FeedbackMode mode);
FeedbackMode feedback_mode_from_string(const std::string& name);

struct FeedbackConfig {
  std::uint64_t pool_size = 1ULL << 15;
  std::uint64_t bins = 2;  ///< L, a power of two dividing N
  FeedbackMode mode = FeedbackMode::kFull;
  std::uint64_t second_bins = 2;  ///< L2 for partial mode: residues of the MSB sent on a retry
  unsigned hash_bits = 1;         ///< h for hashed mode
  std::uint64_t hash_seed = 0x5A17;

  /// Violated constraints, empty when valid.
  [[nodiscard]] std::vector<std::string> violations() const;
  void validate() const;
  [[nodiscard]] std::uint64_t msb_count() const noexcept { return pool_size / bins; }
};

/// h-bit multiply-add-shift hash of a 64-bit key with a 128-bit multiplier.
class UniversalHash {
 public:
  UniversalHash(uint128 multiplier, uint128 increment, unsigned bits);
  /// Key derived from (seed, round id) so both parties agree without communication.
  static UniversalHash keyed(std::uint64_t seed, std::uint64_t round_id, unsigned bits);
  [[nodiscard]] std::uint64_t operator()(std::uint64_t x) const noexcept {
    return static_cast<std::uint64_t>((multiplier_ * x + increment_) >> (128U - bits_));
  }

 private:
  uint128 multiplier_;
  uint128 increment_;
  unsigned bits_;
};

struct Transcript {
  double forward_bits = 0.0;
  double feedback_bits = 0.0;
  bool first_round_matched = false;
  bool undetected_error = false;
  std::uint64_t u_p = 0;
  std::uint64_t u_q_first = 0;
  std::uint64_t u_final = 0;
  Point w_out;
  Point v_hat;
  double distortion = 0.0;
};

/**
 * One protocol run on a pool with index-LSB bins.
 *
 * Forward accounting: log2 L for the label, then 1 acknowledgement bit on a
 * first-round match, or on a detected mismatch log2(N/L) bits for the full
 * MSB (full and hashed modes) or log2 L2 bits (partial mode). Feedback bits
 * are tallied separately: log2(N/L) for full and partial, h for hashed.
 */
Transcript run_feedback_round(const SideInfoProblem& problem, const ProposalPool& pool, const Point& v,
                              const Point& t, const FeedbackConfig& fb);

struct RdGridPoint {
  std::uint64_t pool_size = 1ULL << 15;
  std::uint64_t bins = 2;
  FeedbackMode mode = FeedbackMode::kFull;
  std::uint64_t second_bins = 2;
  unsigned hash_bits = 1;
  double var_w_given_v = 0.01;
};

struct RdPoint {
  std::size_t dim = 1;
  std::uint64_t pool_size = 0;
  std::uint64_t bins = 0;
  FeedbackMode mode = FeedbackMode::kFull;
  std::uint64_t l2_or_h = 0;
  double var_w_given_v = 0.0;
  double rate_bits_per_sample = 0.0;
  double rate_std_err = 0.0;
  double distortion_db = 0.0;
  double mse = 0.0;
  double mse_std_err = 0.0;
  double side_info_mse = 0.0;
  double p_mismatch = 0.0;
  double undetected_err_rate = 0.0;
  double closed_form_rate = 0.0;  ///< log2 L + 1 + (log2 N - log2 L - 1) p, per block, divided by k
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct RdSettings {
  double var_v = 1.0;
  double var_t_given_v = 0.01;
  std::size_t dim = 1;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Runs the feedback protocol over every grid point; trial t of point g uses seed-derived streams (g, t).
std::vector<RdPoint> rd_experiment(const std::vector<RdGridPoint>& grid, const RdSettings& settings);

std::string rd_points_csv_header();
std::string to_csv_row(const RdPoint& p);

}  // namespace iscsim

#endif  // ISCSIM_WYNER_ZIV_HPP
