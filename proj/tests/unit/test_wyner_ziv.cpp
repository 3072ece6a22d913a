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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "iscsim/parallel.hpp"
#include "iscsim/wyner_ziv.hpp"

using namespace iscsim;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

// Posterior of V given T = t by direct Bayes on a grid.
Moments posterior_v_by_grid(double var_v, double var_tv, double t) {
  double z = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  const double h = 1e-4;
  for (double v = -8.0; v <= 8.0; v += h) {
    const double w = std::exp(-0.5 * v * v / var_v - 0.5 * (t - v) * (t - v) / var_tv);
    z += w;
    m1 += w * v;
    m2 += w * v * v;
  }
  const double mean = m1 / z;
  return {mean, m2 / z - mean * mean};
}

}  // namespace

TEST_CASE("posterior of W given T matches numeric convolution") {
  const GaussianWZ m(1.0, 0.01, 0.02);
  for (double t : {-1.3, 0.0, 0.7}) {
    const auto grid = posterior_v_by_grid(1.0, 0.01, t);
    const auto w = m.posterior_w_given_t(t);
    CHECK(w.mean == doctest::Approx(grid.mean).epsilon(1e-6));
    CHECK(w.variance == doctest::Approx(grid.var + 0.02).epsilon(1e-6));
    const auto v = m.posterior_v_given_t(t);
    CHECK(v.variance == doctest::Approx(grid.var).epsilon(1e-6));
  }
}

TEST_CASE("conditional mutual information equals the mean information density") {
  const GaussianWZ m(1.0, 0.01, 0.01, 2);
  const RandomStream s{5, 5};
  stats::RunningStats dens;
  stats::RunningStats fused;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    Point v;
    Point t;
    m.sample_source(s, i, v, t);
    const Point w = m.sample_w_given_v(s.child(1), i, v);
    dens.add(m.info_density_bits(w, v, t));
    const Point vh = m.ivw_fuse(w, t);
    fused.add(0.5 * ((vh[0] - v[0]) * (vh[0] - v[0]) + (vh[1] - v[1]) * (vh[1] - v[1])));
  }
  const double cmi = 0.5 * std::log2((0.01 + 1.0 * 0.01 / 1.01) / 0.01);
  CHECK(m.conditional_mutual_information_bits() == doctest::Approx(cmi));
  CHECK(std::abs(dens.mean() - 2.0 * cmi) < 4.0 * dens.std_err());
  const double var_v_given_t = 0.01 / 1.01;
  const double ivw = 1.0 / (1.0 / 0.01 + 1.0 / var_v_given_t);
  CHECK(std::abs(fused.mean() - ivw) < 4.0 * fused.std_err());
}

TEST_CASE("decoder output always carries the transmitted label") {
  const GaussianSideInfoProblem problem(GaussianWZ(1.0, 0.01, 0.01));
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Point v;
    Point t;
    problem.sample_source(RandomStream{2, 2}, trial, v, t);
    for (const BinMode mode : {BinMode::kIndexLsb, BinMode::kIidUniform}) {
      const ProposalPool pool(RandomStream{3, trial}, 1024, problem.marginal_w(), 8, mode);
      const auto enc = encode_side_info(problem, pool, v);
      CHECK(enc.label == pool.label(enc.selection.index));
      const auto dec = decode_side_info(problem, pool, t, enc.label);
      CHECK(pool.label(dec.index) == enc.label);
    }
  }
  const ProposalPool tiny(RandomStream{1, 1}, 1, problem.marginal_w(), 64, BinMode::kIidUniform);
  const std::uint64_t missing = tiny.label(1) % 64 + 1;
  CHECK_THROWS_AS(decode_side_info(problem, tiny, Point::scalar(0.0), missing), EmptyBinError);
}

TEST_CASE("side-information mismatch bound dominates the empirical rate") {
  const GaussianSideInfoProblem problem(GaussianWZ(1.0, 0.01, 0.01));
  for (std::uint64_t l : {4ULL, 16ULL}) {
    const auto mc = parallel_trials<stats::RunningStats>(3000, 2, [&](std::uint64_t trial, stats::RunningStats& a) {
      Point v;
      Point t;
      problem.sample_source(RandomStream{9, 1}, trial, v, t);
      const ProposalPool pool(RandomStream{9, 2}.child(trial), 2048, problem.marginal_w(), l, BinMode::kIidUniform);
      const auto enc = encode_side_info(problem, pool, v);
      a.add(decode_side_info(problem, pool, t, enc.label).index != enc.selection.index ? 1.0 : 0.0);
    });
    const auto bound = side_info_mismatch_bound(problem, static_cast<double>(l), 0.1, 50000, RandomStream{9, 3});
    CHECK(mc.mean() - 3.0 * mc.std_err() <= bound.value + 3.0 * bound.std_err);
  }
}

TEST_CASE("feedback config invariants") {
  FeedbackConfig fb;
  CHECK(fb.violations().empty());
  fb.bins = 3;
  CHECK_FALSE(fb.violations().empty());
  fb.bins = 1ULL << 16;
  CHECK_THROWS_AS(fb.validate(), std::invalid_argument);
  fb = FeedbackConfig{};
  fb.mode = FeedbackMode::kPartial;
  fb.second_bins = fb.msb_count() + 1;
  CHECK_FALSE(fb.violations().empty());
  fb = FeedbackConfig{};
  fb.mode = FeedbackMode::kHashed;
  fb.hash_bits = 0;
  CHECK_FALSE(fb.violations().empty());
  CHECK(feedback_mode_from_string("partial") == FeedbackMode::kPartial);
  CHECK(to_string(FeedbackMode::kHashed) == "hashed");
  CHECK_THROWS(feedback_mode_from_string("bogus"));
}

TEST_CASE("universal hash collides at rate 2^-h on distinct inputs") {
  for (unsigned h : {1U, 2U, 4U}) {
    std::uint64_t collisions = 0;
    const std::uint64_t n = 40000;
    for (std::uint64_t r = 0; r < n; ++r) {
      const auto x = RandomStream{7, 7}.below(r, 1ULL << 14, 0);
      auto y = RandomStream{7, 7}.below(r, 1ULL << 14, 1);
      if (y == x) y = (y + 1) % (1ULL << 14);
      const auto hash = UniversalHash::keyed(99, r, h);
      collisions += hash(x) == hash(y) ? 1 : 0;
    }
    const double p = std::ldexp(1.0, -static_cast<int>(h));
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(collisions) / static_cast<double>(n) - p) < 3.0 * se);
  }
}

TEST_CASE("feedback transcripts follow the accounting rules") {
  const GaussianSideInfoProblem problem(GaussianWZ(1.0, 0.01, 0.01));
  const std::uint64_t n = 1ULL << 10;
  const std::uint64_t l = 4;
  FeedbackConfig full{n, l, FeedbackMode::kFull, 2, 1, 0x5A17};
  FeedbackConfig exact{n, l, FeedbackMode::kPartial, n / l, 1, 0x5A17};
  FeedbackConfig none{n, l, FeedbackMode::kNone, 2, 1, 0x5A17};
  std::uint64_t mismatches = 0;
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    Point v;
    Point t;
    problem.sample_source(RandomStream{4, 4}, trial, v, t);
    const ProposalPool pool(RandomStream{4, 5}.child(trial), n, problem.marginal_w(), l, BinMode::kIndexLsb);
    const auto tr = run_feedback_round(problem, pool, v, t, full);
    CHECK(tr.u_final == tr.u_p);
    CHECK_FALSE(tr.undetected_error);
    CHECK(tr.forward_bits == (tr.first_round_matched ? 2.0 + 1.0 : 10.0));
    mismatches += tr.first_round_matched ? 0 : 1;
    // Sending every MSB residue pins the index down.
    const auto tp = run_feedback_round(problem, pool, v, t, exact);
    CHECK(tp.u_final == tp.u_p);
    const auto tn = run_feedback_round(problem, pool, v, t, none);
    CHECK(tn.forward_bits == 2.0);
    CHECK(tn.feedback_bits == 0.0);
  }
  CHECK(mismatches > 0);
}

TEST_CASE("rd experiment is deterministic and matches the closed-form rate in full mode") {
  RdGridPoint g;
  g.pool_size = 1ULL << 10;
  g.bins = 2;
  g.mode = FeedbackMode::kFull;
  RdSettings s;
  s.trials = 200;
  s.seed = 3;
  s.threads = 1;
  const auto a = rd_experiment({g}, s);
  s.threads = 3;
  const auto b = rd_experiment({g}, s);
  REQUIRE(a.size() == 1);
  CHECK(to_csv_row(a[0]) == to_csv_row(b[0]));
  CHECK(a[0].rate_bits_per_sample == doctest::Approx(a[0].closed_form_rate).epsilon(1e-12));
  CHECK(a[0].mse <= a[0].side_info_mse);
  CHECK(rd_points_csv_header() ==
        "k,N,L,mode,L2_or_h,sigma2_wv,rate_bits_per_sample,distortion_db,mse,p_mismatch,undetected_err_rate,trials,"
        "seed");
}
