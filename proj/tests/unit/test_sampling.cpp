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
#include <numeric>

#include "../support/fixed_pool.hpp"
#include "iscsim/exponential_race.hpp"
#include "iscsim/random_stream.hpp"
#include "iscsim/stats.hpp"

using namespace iscsim;
using iscsim::testing::FixedPool;
using iscsim::testing::symbol_points;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of seed, stream and counter") {
  const RandomStream a{42, 7};
  const RandomStream b{42, 7};
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.uniform(i) == b.uniform(i));
    CHECK(a.child(3).normal(i) == b.child(3).normal(i));
  }
  CHECK(a.uniform(0) != RandomStream{43, 7}.uniform(0));
  CHECK(a.child(1).uniform(0) != a.child(2).uniform(0));
  CHECK(a.uniform(5, 0) != a.uniform(5, 1));
}

TEST_CASE("exponential and normal moments") {
  const RandomStream s{1, 2};
  stats::RunningStats e;
  stats::RunningStats z;
  for (std::uint64_t i = 0; i < 200000; ++i) {
    e.add(s.exponential(i));
    z.add(s.normal(i, 1));
  }
  CHECK(std::abs(e.mean() - 1.0) < 4.0 * e.std_err());
  CHECK(std::abs(e.variance() - 1.0) < 0.03);
  CHECK(std::abs(z.mean()) < 4.0 * z.std_err());
  CHECK(std::abs(z.variance() - 1.0) < 0.02);
}

TEST_CASE("below is uniform on 0..n-1") {
  const RandomStream s{9, 9};
  std::vector<std::uint64_t> counts(7, 0);
  for (std::uint64_t i = 0; i < 70000; ++i) ++counts[s.below(i, 7)];
  const std::vector<double> probs(7, 1.0 / 7.0);
  CHECK(stats::chi_square_gof(counts, probs).p_value > 1e-4);
}

TEST_CASE("race selects index i with probability w_i / sum w on a fixed pool") {
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  std::vector<std::uint64_t> counts(4, 0);
  const RandomStream root{5, 1};
  for (std::uint64_t t = 0; t < 100000; ++t) {
    const FixedPool pool{root.child(t), symbol_points(4)};
    ++counts[select_index(pool, [&](const Point& y) { return std::log(w[static_cast<std::size_t>(y[0])]); }).index - 1];
  }
  CHECK(stats::chi_square_gof(counts, w).p_value > 1e-4);
}

TEST_CASE("race ignores zero weights and rejects all-zero pools") {
  const FixedPool pool{RandomStream{1, 1}, symbol_points(5)};
  for (std::uint64_t t = 0; t < 50; ++t) {
    const FixedPool p{RandomStream{1, t}, symbol_points(5)};
    const auto sel = select_index(p, [](const Point& y) { return y[0] == 3.0 ? 0.0 : kNegInf; });
    CHECK(sel.index == 4);
  }
  CHECK_THROWS_AS(select_index(pool, [](const Point&) { return kNegInf; }), DegenerateWeightsError);
  CHECK_THROWS_AS(select_index(pool, [](const Point&) { return std::nan(""); }), std::invalid_argument);
}

TEST_CASE("ties go to the smaller index") {
  RaceArgmin a;
  a.offer(3, 1.0, 0.0);
  a.offer(5, 1.0, 0.0);
  a.offer(7, 2.0, std::log(2.0));
  CHECK(a.selection().index == 3);
}

TEST_CASE("constant shift of log-weights leaves the selection unchanged") {
  for (std::uint64_t t = 0; t < 200; ++t) {
    const FixedPool pool{RandomStream{11, t}, symbol_points(16)};
    const auto f = [](const Point& y) { return std::sin(y[0]) * 3.0; };
    const auto a = select_index(pool, f);
    const auto b = select_index(pool, [&](const Point& y) { return f(y) + 123.25; });
    CHECK(a.index == b.index);
  }
}

TEST_CASE("rank_of and index_of_rank agree with a full sort") {
  for (std::uint64_t t = 0; t < 30; ++t) {
    const FixedPool pool{RandomStream{21, t}, symbol_points(257)};
    std::vector<std::uint64_t> order(pool.size());
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto i, auto j) { return pool.exponential(i) < pool.exponential(j); });
    const auto sel = select_index(pool, [](const Point& y) { return std::cos(y[0]); });
    const auto rank = rank_of(pool, sel);
    CHECK(order[rank - 1] == sel.index);
    for (std::uint64_t k : {1ULL, 2ULL, 17ULL, 128ULL, 257ULL}) CHECK(index_of_rank(pool, k) == order[k - 1]);
  }
}

TEST_CASE("normalized weights and log-sum-exp") {
  const FixedPool pool{RandomStream{1, 1}, symbol_points(4)};
  const auto w = normalized_weights(pool, [](const Point& y) { return std::log(y[0] + 1.0) + 700.0; });
  CHECK(w[0] == doctest::Approx(0.1));
  CHECK(w[3] == doctest::Approx(0.4));
  LogSumExp lse;
  for (double x : {1.0, 2.0, 3.0}) lse.add(x);
  lse.add(kNegInf);
  CHECK(lse.value() == doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
}

TEST_CASE("proposal pool labels") {
  const auto model = std::make_shared<GaussianModel>(0.0, 1.0);
  const ProposalPool lsb(RandomStream{1, 1}, 64, model, 4, BinMode::kIndexLsb);
  CHECK(lsb.label(1) == 1);
  CHECK(lsb.label(4) == 4);
  CHECK(lsb.label(5) == 1);
  const ProposalPool iid(RandomStream{1, 1}, 64, model, 4, BinMode::kIidUniform);
  for (std::uint64_t i = 1; i <= 64; ++i) {
    CHECK(iid.label(i) >= 1);
    CHECK(iid.label(i) <= 4);
  }
  CHECK(ProposalPool(RandomStream{1, 1}, 8, model).label(3) == 1);
}
