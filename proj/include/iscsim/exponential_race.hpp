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

#ifndef ISCSIM_EXPONENTIAL_RACE_HPP
#define ISCSIM_EXPONENTIAL_RACE_HPP

#include <cmath>
#include <concepts>
#include <functional>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "iscsim/point.hpp"
#include "iscsim/probability_model.hpp"
#include "iscsim/random_stream.hpp"

/**
 * \file
 * \brief Shared proposal pools and exponential-race (Gumbel-max) selection.
 *
 * Pool indices are one-based throughout: element i of a pool of size N has
 * 1 <= i <= N. Selection never materializes the pool; every element is
 * regenerated from the counter-based stream on demand.
 */

namespace iscsim {

/// Thrown when every sampled log-weight is -inf, so no index can be selected.
class DegenerateWeightsError : public std::runtime_error {
 public:
  DegenerateWeightsError() : std::runtime_error("degenerate weights: all importance weights are zero") {}
};

/// How bin labels l_i are attached to pool elements.
enum class BinMode {
  kNone,        ///< no labels
  kIidUniform,  ///< l_i i.i.d. uniform on {1..L}
  kIndexLsb,    ///< l_i = ((i - 1) mod L) + 1
};

/**
 * Descriptor of the shared randomness (S_i, Y_i, l_i), i = 1..N.
 *
 * S_i ~ Exp(1) i.i.d., Y_i ~ proposal i.i.d., and l_i as selected by the bin
 * mode. The three sequences use independent sub-streams of `stream`.
 */
class ProposalPool {
 public:
  ProposalPool(RandomStream stream, std::uint64_t size, std::shared_ptr<const ProbabilityModel> proposal,
               std::uint64_t bins = 1, BinMode bin_mode = BinMode::kNone);

  [[nodiscard]] std::uint64_t size() const noexcept { return size_; }
  [[nodiscard]] std::uint64_t bins() const noexcept { return bins_; }
  [[nodiscard]] BinMode bin_mode() const noexcept { return bin_mode_; }
  [[nodiscard]] const RandomStream& stream() const noexcept { return stream_; }
  [[nodiscard]] const ProbabilityModel& proposal() const noexcept { return *proposal_; }
  [[nodiscard]] std::shared_ptr<const ProbabilityModel> proposal_ptr() const noexcept { return proposal_; }

  [[nodiscard]] double exponential(std::uint64_t i) const noexcept { return exp_stream_.exponential(i); }
  [[nodiscard]] Point sample(std::uint64_t i) const { return proposal_->sample(sample_stream_, i); }
  /// Bin label in 1..L (always 1 when the pool carries no labels).
  [[nodiscard]] std::uint64_t label(std::uint64_t i) const noexcept {
    switch (bin_mode_) {
      case BinMode::kIndexLsb:
        return ((i - 1) % bins_) + 1;
      case BinMode::kIidUniform:
        return label_stream_.below(i, bins_) + 1;
      case BinMode::kNone:
        break;
    }
    return 1;
  }

 private:
  RandomStream stream_;
  RandomStream exp_stream_;
  RandomStream sample_stream_;
  RandomStream label_stream_;
  std::uint64_t size_;
  std::shared_ptr<const ProbabilityModel> proposal_;
  std::uint64_t bins_;
  BinMode bin_mode_;
};

/// Anything that can host an exponential race: S_i and Y_i regenerable by index.
template <class P>
concept RacePool = requires(const P& pool, std::uint64_t i) {
  { pool.size() } -> std::convertible_to<std::uint64_t>;
  { pool.exponential(i) } -> std::convertible_to<double>;
  { pool.sample(i) } -> std::convertible_to<Point>;
};

/// Result of an exponential race.
struct Selection {
  std::uint64_t index = 0;     ///< winning index U, one-based
  double log_score = 0.0;      ///< ln(S_U) - log_weight(Y_U)
  double raw_exponential = 0;  ///< S_U
  std::optional<std::uint64_t> rank;  ///< position K of S_U in the sorted S sequence, when computed

  [[nodiscard]] double score() const noexcept { return std::exp(log_score); }
};

/// Running argmin of ln(S_i) - w_i with ties broken toward the smaller index.
class RaceArgmin {
 public:
  void offer(std::uint64_t i, double s, double log_weight) {
    if (std::isnan(log_weight)) throw std::invalid_argument("log-weight is NaN");
    if (log_weight == kNegInf) return;
    const double key = std::log(s) - log_weight;
    if (!found_ || key < best_.log_score) {
      best_.index = i;
      best_.log_score = key;
      best_.raw_exponential = s;
      found_ = true;
    }
  }
  [[nodiscard]] bool found() const noexcept { return found_; }
  [[nodiscard]] const Selection& selection() const {
    if (!found_) throw DegenerateWeightsError();
    return best_;
  }

 private:
  Selection best_{};
  bool found_ = false;
};

/**
 * Exponential race with an index-aware weight: argmin_i ln S_i - log_weight(i, Y_i).
 *
 * log_weight may return -inf ("never select"); if it does so for every index
 * the race throws DegenerateWeightsError.
 */
template <RacePool Pool, class IndexedLogWeight>
  requires std::invocable<IndexedLogWeight, std::uint64_t, const Point&>
Selection race(const Pool& pool, IndexedLogWeight&& log_weight) {
  RaceArgmin argmin;
  const std::uint64_t n = pool.size();
  for (std::uint64_t i = 1; i <= n; ++i) {
    argmin.offer(i, pool.exponential(i), log_weight(i, pool.sample(i)));
  }
  return argmin.selection();
}

/// Gumbel-max index selection: argmin_i S_i / exp(log_weight(Y_i)).
template <RacePool Pool, class LogWeight>
  requires std::invocable<LogWeight, const Point&>
Selection select_index(const Pool& pool, LogWeight&& log_weight) {
  return race(pool, [&](std::uint64_t, const Point& y) { return log_weight(y); });
}

/// K = |{i : S_i < S_U}| + |{i < U : S_i = S_U}| + 1, by a second pass over S.
template <RacePool Pool>
std::uint64_t rank_of(const Pool& pool, const Selection& sel) {
  const double su = sel.raw_exponential;
  std::uint64_t below = 0;
  const std::uint64_t n = pool.size();
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double s = pool.exponential(i);
    if (s < su || (s == su && i < sel.index)) ++below;
  }
  return below + 1;
}

/**
 * Index whose S-rank is k (1 <= k <= N), i.e. the inverse of rank_of.
 *
 * Streams the pool once and keeps the k smallest (S_i, i) pairs, so memory is
 * O(k) rather than O(N).
 */
std::uint64_t index_of_rank(const std::function<double(std::uint64_t)>& exponential_at, std::uint64_t size,
                            std::uint64_t k);

template <RacePool Pool>
std::uint64_t index_of_rank(const Pool& pool, std::uint64_t k) {
  return index_of_rank([&pool](std::uint64_t i) { return pool.exponential(i); }, pool.size(), k);
}

/// Online log-sum-exp accumulator that also tracks sum(e^{x}·x).
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x > max_) {
      const double scale = std::exp(max_ - x);
      sum_ = sum_ * scale + 1.0;
      weighted_ = weighted_ * scale + x;
      max_ = x;
    } else {
      const double e = std::exp(x - max_);
      sum_ += e;
      weighted_ += e * x;
    }
  }
  [[nodiscard]] bool empty() const noexcept { return max_ == kNegInf; }
  /// ln sum_i e^{x_i}
  [[nodiscard]] double value() const noexcept { return max_ + std::log(sum_); }
  /// sum_i softmax_i · x_i
  [[nodiscard]] double softmax_mean() const noexcept { return weighted_ / sum_; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
  double weighted_ = 0.0;
};

/// Normalized importance weights lambda_i proportional to exp(log_weight(Y_i)).
template <RacePool Pool, class LogWeight>
std::vector<double> normalized_weights(const Pool& pool, LogWeight&& log_weight) {
  const std::uint64_t n = pool.size();
  std::vector<double> lw(n);
  LogSumExp lse;
  for (std::uint64_t i = 1; i <= n; ++i) {
    lw[i - 1] = log_weight(pool.sample(i));
    if (std::isnan(lw[i - 1])) throw std::invalid_argument("log-weight is NaN");
    lse.add(lw[i - 1]);
  }
  if (lse.empty()) throw DegenerateWeightsError();
  const double log_z = lse.value();
  for (double& v : lw) v = std::exp(v - log_z);
  return lw;
}

/// Log-weight of a target against a proposal: ln p_target(y) - ln p_proposal(y).
inline auto log_ratio(const ProbabilityModel& target, const ProbabilityModel& proposal) {
  return [&target, &proposal](const Point& y) {
    const double num = target.log_density(y);
    if (num == kNegInf) return kNegInf;
    return num - proposal.log_density(y);
  };
}

}  // namespace iscsim

#endif  // ISCSIM_EXPONENTIAL_RACE_HPP
