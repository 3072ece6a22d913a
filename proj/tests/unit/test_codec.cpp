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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "iscsim/ce_isc.hpp"
#include "iscsim/index_coder.hpp"

using namespace iscsim;

namespace {

// Simpson quadrature of f over [a, b].
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double normal_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

void check_prefix_free(const IndexCoder& coder, std::uint64_t max_k) {
  std::vector<std::string> words;
  double kraft = 0.0;
  for (std::uint64_t k = 1; k <= max_k; ++k) {
    words.push_back(coder.encode(k).to_string());
    REQUIRE(words.back().size() == coder.code_length(k));
    kraft += std::ldexp(1.0, -static_cast<int>(words.back().size()));
  }
  CHECK(kraft <= 1.0);
  std::sort(words.begin(), words.end());
  for (std::size_t j = 0; j + 1 < words.size(); ++j) {
    REQUIRE_FALSE(words[j + 1].starts_with(words[j]));
  }
}

}  // namespace

TEST_CASE("code lengths") {
  const auto e = IndexCoder::elias_delta();
  CHECK(e.code_length(1) == 1);
  CHECK(e.code_length(2) == 4);
  CHECK(e.code_length(3) == 4);
  CHECK(e.code_length(4) == 5);
  CHECK(e.code_length(16) == 9);
  CHECK(e.encode(1).to_string() == "1");
  CHECK(e.encode(2).to_string() == "0100");
  CHECK(IndexCoder::zipf(2.0).code_length(1) == 2);
  const auto z = IndexCoder::zipf(1.5);
  for (std::uint64_t k : {1ULL, 7ULL, 1000ULL, 1ULL << 40}) {
    const double ideal = 1.5 * std::log2(static_cast<double>(k)) + std::log2(2.612375348685488);
    CHECK(z.code_length(k) == static_cast<unsigned>(std::ceil(ideal)) + 1);
  }
  CHECK(IndexCoder::default_zipf_exponent(0.0) == doctest::Approx(1.0 + 1.0 / 1.5307993));
}

TEST_CASE("codes are prefix-free up to 2^16") {
  check_prefix_free(IndexCoder::elias_delta(), 1U << 16);
  check_prefix_free(IndexCoder::zipf(1.2), 1U << 16);
  check_prefix_free(IndexCoder::zipf(2.5), 1U << 16);
}

TEST_CASE("concatenated codewords decode back in order") {
  for (const auto& coder : {IndexCoder::elias_delta(), IndexCoder::zipf(1.1)}) {
    BitString bits;
    std::vector<std::uint64_t> ks;
    for (std::uint64_t k = 1; k < 3000; k += 7) ks.push_back(k);
    for (std::uint64_t k : {1ULL << 33, (1ULL << 63) + 5, ~0ULL}) ks.push_back(k);
    for (auto k : ks) coder.encode(k, bits);
    BitReader r(bits);
    for (auto k : ks) CHECK(coder.decode(r) == k);
    CHECK(r.exhausted());
  }
}

TEST_CASE("malformed bit strings are rejected") {
  const auto e = IndexCoder::elias_delta();
  BitString empty;
  BitReader r0(empty);
  CHECK_THROWS_AS(e.decode(r0), DecodeError);
  const auto cut = BitString::from_string("011");
  BitReader r1(cut);
  CHECK_THROWS_AS(e.decode(r1), DecodeError);
  const auto long_prefix = BitString::from_string("00000001000000000");
  BitReader r2(long_prefix);
  CHECK_THROWS_AS(e.decode(r2), DecodeError);
  CHECK_THROWS_AS(BitString::from_string("01x"), std::invalid_argument);
  CHECK_THROWS_AS((void)e.encode(0), std::invalid_argument);

  const auto pool = ProposalPool(RandomStream{3, 3}, 8, std::make_shared<GaussianModel>(0.0, 1.0));
  CHECK_THROWS_AS(decode(e.encode(9), pool, e), DecodeError);
  auto trailing = e.encode(3);
  trailing.push_back(true);
  CHECK_THROWS_AS(decode(trailing, pool, e), DecodeError);
}

TEST_CASE("encode and decode agree on the selected sample") {
  const auto proposal = std::make_shared<GaussianModel>(0.0, 1.01);
  const auto coder = IndexCoder::zipf(IndexCoder::default_zipf_exponent(3.0));
  for (std::uint64_t t = 0; t < 100; ++t) {
    const GaussianModel target(RandomStream{1, 2}.normal(t), 0.01);
    const ProposalPool pool(RandomStream{4, t}, 1024, proposal);
    const auto enc = encode(pool, target, coder);
    const auto dec = decode(enc.bits, pool, coder);
    CHECK(dec.index == enc.selection.index);
    CHECK(dec.sample == pool.sample(enc.selection.index));
    CHECK(enc.bits.size() == coder.code_length(enc.rank));
  }
}

TEST_CASE("expected log-rank stays below the KL plus constant") {
  const auto proposal = std::make_shared<GaussianModel>(0.0, 1.01);
  RateAccumulator acc;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    const GaussianModel target(RandomStream{8, 1}.normal(t), 0.01);
    acc.add(encode(ProposalPool(RandomStream{8, 2}.child(t), 4096, proposal), target, IndexCoder::elias_delta()));
  }
  const auto s = acc.finish();
  CHECK(s.trials == 2000);
  CHECK(s.mean_log2_k <= s.mean_kl_lambda_uniform_bits + kRankDelta);
  CHECK(s.mean_code_length >= s.mean_log2_k);
}

TEST_CASE("gaussian divergence and ratio bound match quadrature") {
  const GaussianModel p(0.3, 0.2);
  const GaussianModel q(-0.1, 1.5);
  const double kl = simpson(
      [&](double x) {
        const double a = normal_pdf(x, 0.3, 0.2);
        return a * std::log2(a / normal_pdf(x, -0.1, 1.5));
      },
      -6.0, 6.0);
  CHECK(gaussian_kl_bits(p, q) == doctest::Approx(kl).epsilon(1e-8));
  double best = -1e300;
  for (double x = -3.0; x <= 3.0; x += 1e-5) best = std::max(best, p.log_pdf(x) - q.log_pdf(x));
  CHECK(gaussian_log_omega(p, q) == doctest::Approx(best).epsilon(1e-9));
  CHECK(std::isinf(gaussian_log_omega(q, p)));
}

TEST_CASE("n0 root finding") {
  for (double omega : {1.0, 1.5, 4.0, 30.0}) {
    for (double eps : {0.05, 0.1, 0.3}) {
      const auto b = n0_bound(2.0, omega, eps);
      CHECK(b.log2_n == doctest::Approx(2.0 + b.t));
      if (!b.clamped) CHECK(std::abs(b.residual) < 1e-9);
      if (b.clamped) CHECK(b.residual <= 0.0);
    }
    CHECK(n0_bound(2.0, omega, 0.05).t >= n0_bound(2.0, omega, 0.1).t);
  }
  CHECK(n0_bound(0.0, 1.0, 0.25).t == doctest::Approx(16.0));
  CHECK(n0_bound(0.0, 4.0, 0.1).t > n0_bound(0.0, 2.0, 0.1).t);
  CHECK(n0_bound(0.0, 1.0, 10.0).clamped);
  CHECK_THROWS(n0_bound(1.0, 0.5, 0.1));
}

TEST_CASE("rate bound arithmetic") {
  const double omega = 2.0;
  const double d2 = 1.25;
  const double d3 = 1.8;
  const double alpha = 2.0 * (omega - 1.0) + 2.0 * std::sqrt(omega - 1.0) * std::sqrt(d3 - d2 * d2) + 4.0 * omega * d2;
  CHECK(alpha_term(omega, d2, d3) == doctest::Approx(alpha));
  const double delta = 6.0 * (omega - 1.0) * std::log2(omega) + alpha;
  const double core = 3.0 + delta / 100.0;
  RateBoundInputs in;
  in.mean_kl_lambda_uniform_bits = 2.5;
  in.mutual_information_bits = 3.0;
  in.omega = omega;
  in.mean_alpha = alpha;
  in.pool_size = 100.0;
  in.epsilon = 0.1;
  const auto r = rate_bounds(in);
  CHECK(r.moments_available);
  CHECK(r.log_rank_bits == doctest::Approx(2.5 + 1.0 + std::numbers::log2e / std::numbers::e));
  CHECK(r.rank_entropy_bits == doctest::Approx(core + std::log2(core + 1.0) + 4.0));
  const double an = 100.0 / (99.0 * 0.9);
  const double bn = an * std::log2(an) + 100.0 * std::log2(100.0) * std::exp(-2.0 * 99.0 * 0.01 / 4.0);
  CHECK(r.alpha_n == doctest::Approx(an));
  CHECK(r.beta_n == doctest::Approx(bn));
  CHECK(r.rank_entropy_alt_bits == doctest::Approx(an * 3.0 + bn + std::log2(an * 3.0 + bn + 1.0) + 4.0));

  in.mean_alpha = std::numeric_limits<double>::infinity();
  const auto r2 = rate_bounds(in);
  CHECK_FALSE(r2.moments_available);
  CHECK(std::isnan(r2.rank_entropy_bits));
}

TEST_CASE("binned TV with a single-element pool equals the proposal law") {
  // With N = 1 the output is the proposal itself; the oracle integrates both
  // densities over the target's equal-probability bins.
  const GaussianModel target(0.5, 0.25);
  const GaussianModel proposal(0.0, 1.0);
  const auto edges = equal_probability_edges(target, 16);
  REQUIRE(edges.size() == 15);
  double oracle = 0.0;
  for (std::size_t b = 0; b <= edges.size(); ++b) {
    const double lo = b == 0 ? -12.0 : edges[b - 1];
    const double hi = b == edges.size() ? 12.0 : edges[b];
    const double pq = simpson([](double x) { return normal_pdf(x, 0.0, 1.0); }, lo, hi, 2000);
    oracle += std::abs(pq - 1.0 / 16.0);
  }
  oracle *= 0.5;
  CHECK(binned_gaussian_tv(target, proposal, edges) == doctest::Approx(oracle).epsilon(1e-6));

  TvOptions opt;
  opt.trials = 40000;
  opt.bins = 16;
  opt.seed = 3;
  const auto est = proxy_tv_estimate(target, proposal, 1, opt);
  CHECK_FALSE(est.underpopulated);
  CHECK(est.ci_lo <= est.tv);
  CHECK(est.tv <= est.ci_hi);
  CHECK(std::abs(est.tv - oracle) < 3.0 * (est.ci_hi - est.ci_lo) + est.noise_floor);
}

TEST_CASE("early-stop sampler matches the streaming race in law") {
  const GaussianModel target(0.7, 0.05);
  const GaussianModel proposal(0.0, 1.05);
  TvOptions opt;
  opt.trials = 4000;
  opt.bins = 32;
  opt.bootstrap_replicates = 0;
  opt.engine = TvEngine::kStreaming;
  opt.seed = 11;
  const auto a = proxy_tv_estimate(target, proposal, 512, opt);
  opt.engine = TvEngine::kEarlyStop;
  opt.seed = 12;
  const auto b = proxy_tv_estimate(target, proposal, 512, opt);
  CHECK(a.engine_used == TvEngine::kStreaming);
  CHECK(b.engine_used == TvEngine::kEarlyStop);
  CHECK(stats::ks_two_sample(a.simulated_samples, b.simulated_samples).p_value > 1e-3);

  opt.trials = 100;
  opt.bins = 128;
  CHECK(proxy_tv_estimate(target, proposal, 512, opt).underpopulated);
  opt.engine = TvEngine::kEarlyStop;
  CHECK_THROWS(proxy_tv_estimate(proposal, target, 8, opt));
}

TEST_CASE("proxy TV shrinks with the pool and vanishes when target equals proposal") {
  const GaussianModel target(1.0, 0.01);
  const GaussianModel proposal(0.0, 1.01);
  TvOptions opt;
  opt.trials = 20000;
  opt.bins = 64;
  opt.bootstrap_replicates = 100;
  opt.seed = 21;
  const auto small = proxy_tv_estimate(target, proposal, 1U << 4, opt);
  const auto large = proxy_tv_estimate(target, proposal, 1U << 12, opt);
  CHECK(small.tv > large.ci_hi);
  CHECK(large.ci_lo <= large.tv);
  CHECK(large.tv <= large.ci_hi);

  const auto same = proxy_tv_estimate(proposal, proposal, 256, opt);
  CHECK(same.ci_lo <= same.noise_floor + (same.ci_hi - same.ci_lo));
  CHECK(same.tv < 2.0 * same.noise_floor + 0.02);
}
