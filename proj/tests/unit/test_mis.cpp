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

#include "iscsim/mis.hpp"
#include "iscsim/stats.hpp"

using namespace iscsim;

TEST_CASE("mixture density is the average of its components") {
  const GaussMix gm(2.0, 0.5);
  for (double y : {-3.0, -0.1, 0.0, 1.7, 4.0}) {
    const double avg = 0.5 * std::exp(gm.log_p1(y)) + 0.5 * std::exp(gm.log_p2(y));
    CHECK(std::exp(gm.log_p_y(y)) == doctest::Approx(avg));
    CHECK(gm.marginal_y()->log_density(Point::scalar(y)) == doctest::Approx(gm.log_p_y(y)));
  }
}

TEST_CASE("stratified race reduces to the plain race when the strata coincide") {
  const GaussMix gm(0.0, 1.0);
  const auto comp = gm.component1();
  const auto mixture = gm.marginal_y();
  for (std::uint64_t t = 0; t < 100; ++t) {
    const double x = gm.sample_x(RandomStream{1, 2}, t);
    const auto target = gm.conditional(x);
    const StratifiedPool pool(RandomStream{3, t}, 64, comp, gm.component2());
    CHECK(mis_select(pool, *target, *mixture).index == select_index(pool, log_ratio(*target, *comp)).index);
  }
}

TEST_CASE("sorted-exponential baseline and race agree in law on i.i.d. pools") {
  const GaussMix gm(1.0, 1.0);
  const auto mixture = gm.marginal_y();
  std::vector<double> race_out;
  std::vector<double> orc_out;
  for (std::uint64_t t = 0; t < 4000; ++t) {
    const double x = gm.sample_x(RandomStream{5, 1}, t);
    const auto target = gm.conditional(x);
    const ProposalPool a(RandomStream{5, 2}.child(t), 64, mixture);
    const ProposalPool b(RandomStream{5, 3}.child(t), 64, mixture);
    race_out.push_back(a.sample(select_index(a, log_ratio(*target, *mixture)).index)[0] - x);
    orc_out.push_back(b.sample(orc_select(b, *target, *mixture).index)[0] - x);
  }
  CHECK(stats::ks_two_sample(race_out, orc_out).p_value > 1e-3);
}

TEST_CASE("mis experiment rows") {
  MisSettings s;
  s.offset = 4.0;
  s.trials = 512;
  s.seed = 2;
  const auto rows = mis_experiment({8, 32}, s);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].scheme == "ce-is");
  CHECK(rows[1].scheme == "orc");
  s.threads = 4;
  const auto again = mis_experiment({8, 32}, s);
  for (std::size_t j = 0; j < rows.size(); ++j) CHECK(to_csv_row(rows[j]) == to_csv_row(again[j]));
  CHECK(mis_results_csv_header() == "scheme,N,mean_dist,var_dist,rate_bits,trials,seed");
}
