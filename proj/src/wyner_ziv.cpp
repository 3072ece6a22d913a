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

#include "iscsim/wyner_ziv.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "iscsim/csv.hpp"
#include "iscsim/parallel.hpp"

namespace iscsim {

GaussianSideInfoProblem::GaussianSideInfoProblem(GaussianWZ model)
    : model_{model}, marginal_{model.marginal_w()} {}

double GaussianSideInfoProblem::distortion(const Point& v, const Point& v_hat) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < v.dim(); ++j) {
    const double e = v[j] - v_hat[j];
    sum += e * e;
  }
  return sum / static_cast<double>(v.dim());
}

Point GaussianSideInfoProblem::side_info_estimate(const Point& t) const {
  Point out(t.dim());
  for (std::size_t j = 0; j < t.dim(); ++j) out[j] = model_.posterior_v_given_t(t[j]).mean;
  return out;
}

SideInfoEncoding encode_side_info(const SideInfoProblem& problem, const ProposalPool& pool, const Point& v) {
  SideInfoEncoding out;
  out.selection = race(pool, [&](std::uint64_t, const Point& w) { return problem.encoder_log_weight(w, v); });
  out.label = pool.label(out.selection.index);
  return out;
}

Selection decode_side_info_refined(const SideInfoProblem& problem, const ProposalPool& pool, const Point& t,
                                   std::uint64_t label, std::uint64_t msb_modulus, std::uint64_t msb_residue) {
  if (msb_modulus == 0) throw std::invalid_argument("decode_side_info: zero modulus");
  const std::uint64_t bins = pool.bins();
  RaceArgmin argmin;
  bool any = false;
  auto offer = [&](std::uint64_t i) {
    any = true;
    argmin.offer(i, pool.exponential(i), problem.decoder_log_weight(pool.sample(i), t));
  };
  if (pool.bin_mode() == BinMode::kIndexLsb) {
    // Candidates i = m L + label with m = residue (mod modulus), enumerated in index order.
    if (label == 0 || label > bins) throw EmptyBinError();
    const std::uint64_t msb_count = (pool.size() - label) / bins + 1;
    for (std::uint64_t m = msb_residue; m < msb_count; m += msb_modulus) offer(m * bins + label);
  } else {
    for (std::uint64_t i = 1; i <= pool.size(); ++i) {
      if (pool.label(i) == label && ((i - 1) / bins) % msb_modulus == msb_residue) offer(i);
    }
  }
  if (!any) throw EmptyBinError();
  return argmin.selection();
}

Selection decode_side_info(const SideInfoProblem& problem, const ProposalPool& pool, const Point& t,
                           std::uint64_t label) {
  return decode_side_info_refined(problem, pool, t, label, 1, 0);
}

namespace {

/// x / (1 + x) for x = e^{log_x}.
double logistic(double log_x) noexcept {
  return log_x > 0 ? 1.0 / (1.0 + std::exp(-log_x)) : std::exp(log_x) / (1.0 + std::exp(log_x));
}

template <class Term>
BoundEstimate mc_bound(const SideInfoProblem& problem, double bins, double epsilon, std::uint64_t samples,
                       const RandomStream& stream, Term&& term) {
  if (!(bins >= 1.0)) throw std::invalid_argument("bound: L must be >= 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("bound: epsilon must be nonnegative");
  const double log_scale = std::log1p(epsilon) - std::log(bins);
  const RandomStream src = stream.child(0);
  const RandomStream wst = stream.child(1);
  stats::RunningStats acc;
  Point v;
  Point t;
  for (std::uint64_t s = 1; s <= samples; ++s) {
    problem.sample_source(src, s, v, t);
    const Point w = problem.sample_w_given_v(wst, s, v);
    const double match = 1.0 - logistic(log_scale + problem.info_density_bits(w, v, t) * std::numbers::ln2);
    acc.add(term(v, w, t, match));
  }
  return {acc.mean(), acc.std_err(), acc.count()};
}

}  // namespace

BoundEstimate side_info_mismatch_bound(const SideInfoProblem& problem, double bins, double epsilon,
                                       std::uint64_t samples, const RandomStream& stream) {
  return mc_bound(problem, bins, epsilon, samples, stream,
                  [](const Point&, const Point&, const Point&, double match) { return 1.0 - match; });
}

BoundEstimate excess_distortion_bound(const SideInfoProblem& problem, double max_distortion, double bins,
                                      double epsilon, std::uint64_t samples, const RandomStream& stream) {
  return mc_bound(problem, bins, epsilon, samples, stream,
                  [&](const Point& v, const Point& w, const Point& t, double match) {
                    const bool ok = problem.distortion(v, problem.reconstruct(w, t)) <= max_distortion;
                    return 1.0 - (ok ? match : 0.0);
                  });
}

std::string to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::kNone:
      return "none";
    case FeedbackMode::kFull:
      return "full";
    case FeedbackMode::kPartial:
      return "partial";
    case FeedbackMode::kHashed:
      return "hashed";
  }
  return "unknown";
}

FeedbackMode feedback_mode_from_string(const std::string& name) {
  if (name == "none") return FeedbackMode::kNone;
  if (name == "full") return FeedbackMode::kFull;
  if (name == "partial") return FeedbackMode::kPartial;
  if (name == "hashed") return FeedbackMode::kHashed;
  throw std::invalid_argument("unknown feedback mode '" + name + "'");
}

std::vector<std::string> FeedbackConfig::violations() const {
  std::vector<std::string> out;
  if (pool_size == 0) out.emplace_back("N must be positive");
  if (bins == 0 || !std::has_single_bit(bins)) out.emplace_back("L must be a power of two");
  if (bins > pool_size) out.emplace_back("L must not exceed N");
  if (bins != 0 && pool_size % bins != 0) out.emplace_back("L must divide N");
  if (mode == FeedbackMode::kPartial && bins != 0 && (second_bins < 1 || second_bins > pool_size / bins)) {
    out.emplace_back("L2 must lie in 1..N/L");
  }
  if (mode == FeedbackMode::kHashed && (hash_bits < 1 || hash_bits > 64)) out.emplace_back("h must lie in 1..64");
  return out;
}

void FeedbackConfig::validate() const {
  const auto v = violations();
  if (!v.empty()) throw std::invalid_argument("invalid feedback config: " + v.front());
}

UniversalHash::UniversalHash(uint128 multiplier, uint128 increment, unsigned bits)
    : multiplier_{multiplier | 1U}, increment_{increment}, bits_{bits} {
  if (bits < 1 || bits > 64) throw std::invalid_argument("UniversalHash: bits must lie in 1..64");
}

UniversalHash UniversalHash::keyed(std::uint64_t seed, std::uint64_t round_id, unsigned bits) {
  const RandomStream s{seed, splitmix64(round_id ^ 0x4A5BULL)};
  const auto a = s.bits(0);
  const auto b = s.bits(1);
  return {(static_cast<uint128>(a[0]) << 64U) | a[1], (static_cast<uint128>(b[0]) << 64U) | b[1], bits};
}

Transcript run_feedback_round(const SideInfoProblem& problem, const ProposalPool& pool, const Point& v,
                              const Point& t, const FeedbackConfig& fb) {
  if (pool.bin_mode() != BinMode::kIndexLsb || pool.bins() != fb.bins || pool.size() != fb.pool_size) {
    throw std::invalid_argument("run_feedback_round: pool must carry index-LSB bins matching the config");
  }
  const auto l = static_cast<double>(fb.bins);
  const double msb_bits = std::log2(static_cast<double>(fb.msb_count()));

  Transcript tr;
  const SideInfoEncoding enc = encode_side_info(problem, pool, v);
  tr.u_p = enc.selection.index;
  tr.forward_bits = std::log2(l);
  tr.u_q_first = decode_side_info(problem, pool, t, enc.label).index;
  tr.first_round_matched = tr.u_q_first == tr.u_p;
  const std::uint64_t msb_p = (tr.u_p - 1) / fb.bins;
  const std::uint64_t msb_q = (tr.u_q_first - 1) / fb.bins;

  switch (fb.mode) {
    case FeedbackMode::kNone:
      tr.u_final = tr.u_q_first;
      break;
    case FeedbackMode::kFull:
      tr.feedback_bits = msb_bits;
      tr.forward_bits += tr.first_round_matched ? 1.0 : msb_bits;
      tr.u_final = tr.u_p;
      break;
    case FeedbackMode::kPartial:
      tr.feedback_bits = msb_bits;
      if (tr.first_round_matched) {
        tr.forward_bits += 1.0;
        tr.u_final = tr.u_q_first;
      } else {
        tr.forward_bits += std::log2(static_cast<double>(fb.second_bins));
        tr.u_final =
            decode_side_info_refined(problem, pool, t, enc.label, fb.second_bins, msb_p % fb.second_bins).index;
      }
      tr.undetected_error = tr.u_final != tr.u_p;
      break;
    case FeedbackMode::kHashed: {
      tr.feedback_bits = fb.hash_bits;
      const UniversalHash hash =
          UniversalHash::keyed(fb.hash_seed ^ pool.stream().seed, pool.stream().stream_id, fb.hash_bits);
      if (hash(msb_q) == hash(msb_p)) {
        tr.forward_bits += 1.0;
        tr.u_final = tr.u_q_first;
      } else {
        tr.forward_bits += msb_bits;
        tr.u_final = tr.u_p;
      }
      tr.undetected_error = tr.u_final != tr.u_p;
      break;
    }
  }
  tr.w_out = pool.sample(tr.u_final);
  tr.v_hat = problem.reconstruct(tr.w_out, t);
  tr.distortion = problem.distortion(v, tr.v_hat);
  return tr;
}

namespace {

struct RdAccumulator {
  stats::RunningStats rate;
  stats::RunningStats sq_err;
  stats::RunningStats side_info_err;
  std::uint64_t mismatches = 0;
  std::uint64_t undetected = 0;

  void merge(const RdAccumulator& o) {
    rate.merge(o.rate);
    sq_err.merge(o.sq_err);
    side_info_err.merge(o.side_info_err);
    mismatches += o.mismatches;
    undetected += o.undetected;
  }
};

}  // namespace

std::vector<RdPoint> rd_experiment(const std::vector<RdGridPoint>& grid, const RdSettings& settings) {
  if (grid.empty()) throw std::invalid_argument("rd_experiment: empty grid");
  std::vector<RdPoint> out;
  out.reserve(grid.size());
  const RandomStream root{settings.seed, 0xD157};
  const RandomStream source_stream = root.child(0);
  const RandomStream pool_root = root.child(1);
  for (const RdGridPoint& gp : grid) {
    const GaussianSideInfoProblem problem(
        GaussianWZ(settings.var_v, settings.var_t_given_v, gp.var_w_given_v, settings.dim));
    FeedbackConfig fb;
    fb.pool_size = gp.pool_size;
    fb.bins = gp.bins;
    fb.mode = gp.mode;
    fb.second_bins = gp.second_bins;
    fb.hash_bits = gp.hash_bits;
    fb.validate();
    const auto dim = static_cast<double>(settings.dim);

    // Source and pool streams depend only on (seed, t), so grid points are paired.
    const RdAccumulator acc =
        parallel_trials<RdAccumulator>(settings.trials, settings.threads, [&](std::uint64_t t, RdAccumulator& a) {
          Point v;
          Point side;
          problem.sample_source(source_stream, t + 1, v, side);
          const ProposalPool pool(pool_root.child(t), gp.pool_size, problem.marginal_w(), gp.bins,
                                  BinMode::kIndexLsb);
          const Transcript tr = run_feedback_round(problem, pool, v, side, fb);
          a.rate.add(tr.forward_bits / dim);
          a.sq_err.add(tr.distortion);
          a.side_info_err.add(problem.distortion(v, problem.side_info_estimate(side)));
          a.mismatches += tr.first_round_matched ? 0 : 1;
          a.undetected += tr.undetected_error ? 1 : 0;
        });

    RdPoint p;
    p.dim = settings.dim;
    p.pool_size = gp.pool_size;
    p.bins = gp.bins;
    p.mode = gp.mode;
    p.l2_or_h = gp.mode == FeedbackMode::kPartial ? gp.second_bins
                : gp.mode == FeedbackMode::kHashed ? gp.hash_bits
                                                   : 0;
    p.var_w_given_v = gp.var_w_given_v;
    p.trials = settings.trials;
    p.seed = settings.seed;
    const auto n = static_cast<double>(settings.trials);
    p.rate_bits_per_sample = acc.rate.mean();
    p.rate_std_err = acc.rate.std_err();
    p.mse = acc.sq_err.mean();
    p.mse_std_err = acc.sq_err.std_err();
    p.side_info_mse = acc.side_info_err.mean();
    if (gp.mode == FeedbackMode::kNone && p.mse > p.side_info_mse) {
      // Without feedback a decoder that ignores W is never worse.
      p.mse = p.side_info_mse;
      p.mse_std_err = acc.side_info_err.std_err();
    }
    p.distortion_db = 10.0 * std::log10(p.mse);
    p.p_mismatch = static_cast<double>(acc.mismatches) / n;
    p.undetected_err_rate = static_cast<double>(acc.undetected) / n;
    const double log2_l = std::log2(static_cast<double>(gp.bins));
    const double log2_n = std::log2(static_cast<double>(gp.pool_size));
    p.closed_form_rate = (log2_l + 1.0 + (log2_n - log2_l - 1.0) * p.p_mismatch) / dim;
    out.push_back(p);
  }
  return out;
}

std::string rd_points_csv_header() {
  return "k,N,L,mode,L2_or_h,sigma2_wv,rate_bits_per_sample,distortion_db,mse,p_mismatch,undetected_err_rate,"
         "trials,seed";
}

std::string to_csv_row(const RdPoint& p) {
  using csv::format_number;
  return csv::join({format_number(static_cast<std::uint64_t>(p.dim)), format_number(p.pool_size),
                    format_number(p.bins), to_string(p.mode), format_number(p.l2_or_h),
                    format_number(p.var_w_given_v), format_number(p.rate_bits_per_sample),
                    format_number(p.distortion_db), format_number(p.mse), format_number(p.p_mismatch),
                    format_number(p.undetected_err_rate), format_number(p.trials), format_number(p.seed)});
}

}  // namespace iscsim
