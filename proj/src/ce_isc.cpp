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

#include "iscsim/ce_isc.hpp"

#include <algorithm>

namespace iscsim {

EncodeResult encode(const ProposalPool& pool, const ProbabilityModel& target, const IndexCoder& coder) {
  return encode_with(pool, log_ratio(target, pool.proposal()), coder);
}

DecodeResult decode(const BitString& bits, const ProposalPool& pool, const IndexCoder& coder) {
  return decode_with(bits, pool, coder);
}

void RateAccumulator::add(const EncodeResult& r) {
  log2_k_.add(std::log2(static_cast<double>(r.rank)));
  code_length_.add(static_cast<double>(r.bits.size()));
  kl_.add(r.kl_lambda_uniform_bits);
  ++histogram_[r.rank];
}

void RateAccumulator::merge(const RateAccumulator& other) {
  log2_k_.merge(other.log2_k_);
  code_length_.merge(other.code_length_);
  kl_.merge(other.kl_);
  for (const auto& [k, c] : other.histogram_) histogram_[k] += c;
}

RateStats RateAccumulator::finish() const {
  RateStats s;
  s.trials = log2_k_.count();
  s.mean_log2_k = log2_k_.mean();
  s.mean_log2_k_std_err = log2_k_.std_err();
  s.entropy_k_bits = stats::plugin_entropy_bits(histogram_);
  s.mean_code_length = code_length_.mean();
  s.mean_code_length_std_err = code_length_.std_err();
  s.mean_kl_lambda_uniform_bits = kl_.mean();
  s.mean_kl_lambda_uniform_std_err = kl_.std_err();
  return s;
}

double gaussian_log_omega(const GaussianModel& target, const GaussianModel& proposal) {
  const double s2 = target.variance();
  const double t2 = proposal.variance();
  if (s2 >= t2) {
    // Equal variances give a bounded ratio only with equal means.
    if (s2 == t2 && target.mean() == proposal.mean()) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  const double dm = target.mean() - proposal.mean();
  return 0.5 * std::log(t2 / s2) + dm * dm / (2.0 * (t2 - s2));
}

double gaussian_kl_bits(const GaussianModel& target, const GaussianModel& proposal) {
  const double s2 = target.variance();
  const double t2 = proposal.variance();
  const double dm = target.mean() - proposal.mean();
  const double nats = 0.5 * (std::log(t2 / s2) + (s2 + dm * dm) / t2 - 1.0);
  return nats * std::numbers::log2e;
}

EarlyStopDraw early_stop_select(const RandomStream& stream, std::uint64_t pool_size, const ProbabilityModel& proposal,
                                const std::function<double(const Point&)>& log_weight, double log_omega) {
  if (pool_size == 0) throw std::invalid_argument("early_stop_select: empty pool");
  if (!std::isfinite(log_omega)) throw std::invalid_argument("early_stop_select: omega must be finite");
  const RandomStream exp_stream = stream.child(0);
  const RandomStream sample_stream = stream.child(1);
  const double stop_shift = log_omega + 1e-12;

  EarlyStopDraw best;
  double best_key = std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::uint64_t k = 1; k <= pool_size; ++k) {
    s += exp_stream.exponential(k) / static_cast<double>(pool_size - k + 1);
    const double log_s = std::log(s);
    best.steps = k;
    if (log_s - stop_shift >= best_key) break;
    const Point y = proposal.sample(sample_stream, k);
    const double lw = log_weight(y);
    if (std::isnan(lw)) throw std::invalid_argument("log-weight is NaN");
    if (lw == kNegInf) continue;
    const double key = log_s - lw;
    if (key < best_key) {
      best_key = key;
      best.sample = y;
      best.rank = k;
    }
  }
  if (best.rank == 0) throw DegenerateWeightsError();
  return best;
}

std::vector<double> equal_probability_edges(const GaussianModel& model, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("equal_probability_edges: need at least two bins");
  std::vector<double> edges(bins - 1);
  for (std::size_t j = 1; j < bins; ++j) {
    edges[j - 1] = model.quantile(static_cast<double>(j) / static_cast<double>(bins));
  }
  return edges;
}

double binned_gaussian_tv(const GaussianModel& a, const GaussianModel& b, std::span<const double> inner_edges) {
  double tv = 0.0;
  double fa_prev = 0.0;
  double fb_prev = 0.0;
  for (std::size_t j = 0; j <= inner_edges.size(); ++j) {
    const double fa = j < inner_edges.size() ? a.cdf(inner_edges[j]) : 1.0;
    const double fb = j < inner_edges.size() ? b.cdf(inner_edges[j]) : 1.0;
    tv += std::abs((fa - fa_prev) - (fb - fb_prev));
    fa_prev = fa;
    fb_prev = fb;
  }
  return 0.5 * tv;
}

namespace {

using BinIndex = std::uint16_t;

double histogram_tv(std::span<const std::uint64_t> a, double na, std::span<const std::uint64_t> b, double nb) {
  double tv = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    tv += std::abs(static_cast<double>(a[j]) / na - static_cast<double>(b[j]) / nb);
  }
  return 0.5 * tv;
}

std::vector<std::uint64_t> counts_of(std::span<const BinIndex> bins, std::size_t n_bins) {
  std::vector<std::uint64_t> c(n_bins, 0);
  for (BinIndex b : bins) ++c[b];
  return c;
}

std::vector<BinIndex> target_bins(const GaussianModel& target, std::span<const double> edges, const RandomStream& s,
                                  std::uint64_t n) {
  std::vector<BinIndex> out(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    out[i] = static_cast<BinIndex>(stats::bin_of(edges, target.sample(s, i + 1)[0]));
  }
  return out;
}

}  // namespace

TvEstimate proxy_tv_estimate(const GaussianModel& target, const GaussianModel& proposal, std::uint64_t pool_size,
                             const TvOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("proxy_tv_estimate: trials must be positive");
  if (options.bins < 2 || options.bins > 65535) throw std::invalid_argument("proxy_tv_estimate: bad bin count");
  const RandomStream root{options.seed, 0x7F5EA1};
  const auto proposal_ptr = std::make_shared<GaussianModel>(proposal);
  const auto log_weight = log_ratio(target, proposal);
  const double log_omega = gaussian_log_omega(target, proposal);

  TvEngine engine = options.engine;
  if (engine == TvEngine::kAuto) {
    engine = (pool_size <= options.streaming_limit || !std::isfinite(log_omega)) ? TvEngine::kStreaming
                                                                                 : TvEngine::kEarlyStop;
  }
  if (engine == TvEngine::kEarlyStop && !std::isfinite(log_omega)) {
    throw std::invalid_argument("proxy_tv_estimate: early stopping needs a bounded ratio");
  }

  const std::vector<double> edges = equal_probability_edges(target, options.bins);
  TvEstimate est;
  est.engine_used = engine;
  est.trials = options.trials;
  est.simulated_samples.resize(options.trials);
  std::vector<BinIndex> sim(options.trials);
  const RandomStream trial_root = root.child(1);
  for (std::uint64_t t = 0; t < options.trials; ++t) {
    const RandomStream ts = trial_root.child(t);
    double y = 0.0;
    if (engine == TvEngine::kStreaming) {
      const ProposalPool pool(ts, pool_size, proposal_ptr);
      y = pool.sample(select_index(pool, log_weight).index)[0];
    } else {
      y = early_stop_select(ts, pool_size, proposal, log_weight, log_omega).sample[0];
    }
    est.simulated_samples[t] = y;
    sim[t] = static_cast<BinIndex>(stats::bin_of(edges, y));
  }

  const std::uint64_t n_ref = options.reference_samples == 0 ? options.trials : options.reference_samples;
  const std::vector<BinIndex> ref = target_bins(target, edges, root.child(2), n_ref);
  const std::vector<BinIndex> ref2 = target_bins(target, edges, root.child(3), n_ref);
  const auto sim_counts = counts_of(sim, options.bins);
  const auto ref_counts = counts_of(ref, options.bins);
  const auto ns = static_cast<double>(sim.size());
  const auto nr = static_cast<double>(ref.size());
  est.tv = histogram_tv(sim_counts, ns, ref_counts, nr);
  est.noise_floor = histogram_tv(counts_of(ref2, options.bins), nr, ref_counts, nr);
  est.underpopulated = ns < 10.0 * static_cast<double>(options.bins);

  if (options.bootstrap_replicates > 0) {
    const RandomStream boot = root.child(4);
    std::vector<double> reps(options.bootstrap_replicates);
    std::vector<std::uint64_t> cs(options.bins);
    std::vector<std::uint64_t> cr(options.bins);
    for (std::uint64_t b = 0; b < options.bootstrap_replicates; ++b) {
      const RandomStream bs = boot.child(b);
      std::fill(cs.begin(), cs.end(), 0);
      std::fill(cr.begin(), cr.end(), 0);
      for (std::uint64_t i = 0; i < sim.size(); ++i) ++cs[sim[bs.below(i + 1, sim.size(), 0)]];
      for (std::uint64_t i = 0; i < ref.size(); ++i) ++cr[ref[bs.below(i + 1, ref.size(), 1)]];
      reps[b] = histogram_tv(cs, ns, cr, nr);
    }
    std::sort(reps.begin(), reps.end());
    const auto at = [&reps](double q) {
      const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(reps.size() - 1)));
      return reps[idx];
    };
    // Histogram TV is biased upward and resampling adds the same bias again;
    // shift the percentile interval by the bootstrap bias estimate.
    double rep_mean = 0.0;
    for (double r : reps) rep_mean += r;
    const double bias = rep_mean / static_cast<double>(reps.size()) - est.tv;
    est.ci_lo = std::max(0.0, at(0.025) - bias);
    est.ci_hi = std::max(est.ci_lo, at(0.975) - bias);
  } else {
    est.ci_lo = est.ci_hi = est.tv;
  }
  return est;
}

std::optional<std::uint64_t> N0Bound::pool_size() const {
  if (log2_n >= 63.0) return std::nullopt;
  return static_cast<std::uint64_t>(std::ceil(std::exp2(log2_n)));
}

double n0_tail(double t, double omega) {
  const double first = std::exp2(-t / 8.0);
  const double b = std::log2(omega);
  if (b == 0.0) return first;
  const double z = t / 2.0 - std::numbers::log2e / std::numbers::e;
  return first + std::numbers::sqrt2 * std::exp(-z * z / (4.0 * b * b));
}

N0Bound n0_bound(double dkl_bits, double omega, double epsilon) {
  if (!(omega >= 1.0)) throw std::invalid_argument("n0_bound: omega must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("n0_bound: epsilon must be positive");
  if (!std::isfinite(omega)) throw std::invalid_argument("n0_bound: omega must be finite");
  // g decreases on [t_min, inf), so the smallest admissible t is the root there.
  const double t_min = 2.0 * std::numbers::log2e / std::numbers::e;
  N0Bound out;
  if (n0_tail(t_min, omega) <= epsilon) {
    out.t = t_min;
    out.clamped = true;
  } else {
    double lo = t_min;
    double hi = 2.0 * t_min + 8.0;
    while (n0_tail(hi, omega) > epsilon) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw std::invalid_argument("n0_bound: epsilon too small");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (n0_tail(mid, omega) > epsilon ? lo : hi) = mid;
    }
    out.t = hi;
  }
  out.residual = n0_tail(out.t, omega) - epsilon;
  out.log2_n = dkl_bits + out.t;
  return out;
}

double alpha_term(double omega, double d2, double d3) {
  const double spread = d3 - d2 * d2;
  return 2.0 * (omega - 1.0) + 2.0 * std::sqrt(omega - 1.0) * std::sqrt(std::max(0.0, spread)) + 4.0 * omega * d2;
}

double delta_constant(double omega, double mean_alpha) {
  return 6.0 * (omega - 1.0) * std::log2(omega) + mean_alpha;
}

double bound_expected_log_rank(double mean_kl_lambda_uniform_bits) { return mean_kl_lambda_uniform_bits + kRankDelta; }

double bound_rank_entropy(double mutual_information_bits, double delta, double pool_size) {
  const double core = mutual_information_bits + delta / pool_size;
  return core + std::log2(core + 1.0) + 4.0;
}

double alt_alpha_n(double pool_size, double epsilon) {
  if (!(pool_size >= 2.0)) throw std::invalid_argument("alt bound needs N >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("alt bound needs 0 < epsilon < 1");
  return pool_size / ((pool_size - 1.0) * (1.0 - epsilon));
}

double alt_beta_n(double pool_size, double epsilon, double omega) {
  const double a = alt_alpha_n(pool_size, epsilon);
  return a * std::log2(a) +
         pool_size * std::log2(pool_size) * std::exp(-2.0 * (pool_size - 1.0) * epsilon * epsilon / (omega * omega));
}

double bound_rank_entropy_alt(double mutual_information_bits, double pool_size, double epsilon, double omega) {
  const double core = alt_alpha_n(pool_size, epsilon) * mutual_information_bits + alt_beta_n(pool_size, epsilon, omega);
  return core + std::log2(core + 1.0) + 4.0;
}

RateBoundReport rate_bounds(const RateBoundInputs& in) {
  RateBoundReport r;
  r.log_rank_bits = bound_expected_log_rank(in.mean_kl_lambda_uniform_bits);
  if (std::isfinite(in.mean_alpha) && std::isfinite(in.omega)) {
    r.delta = delta_constant(in.omega, in.mean_alpha);
    r.rank_entropy_bits = bound_rank_entropy(in.mutual_information_bits, r.delta, in.pool_size);
    r.moments_available = true;
  }
  if (in.pool_size >= 2.0 && in.epsilon > 0.0 && in.epsilon < 1.0 && std::isfinite(in.omega)) {
    r.alpha_n = alt_alpha_n(in.pool_size, in.epsilon);
    r.beta_n = alt_beta_n(in.pool_size, in.epsilon, in.omega);
    r.rank_entropy_alt_bits = bound_rank_entropy_alt(in.mutual_information_bits, in.pool_size, in.epsilon, in.omega);
  }
  return r;
}

stats::RunningStats mean_kl_lambda_uniform(const RandomStream& stream, std::uint64_t pool_size,
                                           std::shared_ptr<const ProbabilityModel> proposal,
                                           const ProbabilityModel& target, std::uint64_t pools) {
  stats::RunningStats acc;
  const auto lw = log_ratio(target, *proposal);
  for (std::uint64_t t = 0; t < pools; ++t) {
    const ProposalPool pool(stream.child(t), pool_size, proposal);
    LogSumExp lse;
    for (std::uint64_t i = 1; i <= pool_size; ++i) lse.add(lw(pool.sample(i)));
    if (lse.empty()) throw DegenerateWeightsError();
    const double d = std::log2(static_cast<double>(pool_size)) + (lse.softmax_mean() - lse.value()) * std::numbers::log2e;
    acc.add(std::max(0.0, d));
  }
  return acc;
}

}  // namespace iscsim
