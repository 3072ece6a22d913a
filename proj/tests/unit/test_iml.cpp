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

#include "../support/fixed_pool.hpp"
#include "iscsim/iml.hpp"

using namespace iscsim;
using iscsim::testing::FixedPool;
using iscsim::testing::symbol_points;

TEST_CASE("analytic d-moments") {
  const GaussianModel a(0.0, 1.0);
  const GaussianModel b(0.0, 2.0);
  CHECK(d_moment_gaussian(a, b, 2).value == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK(d_moment_gaussian(a, a, 5).value == doctest::Approx(1.0));
  const auto rev = d_moment_gaussian(b, a, 2);
  CHECK(rev.infinite);
  CHECK(std::isinf(rev.value));

  // Quadrature oracle for a shifted pair.
  const GaussianModel p(0.4, 0.5);
  const GaussianModel q(-0.2, 1.3);
  double sum = 0.0;
  const double h = 1e-3;
  for (double x = -12.0; x <= 12.0; x += h) {
    const double lp = p.log_pdf(x);
    sum += std::exp(lp + 2.0 * (lp - q.log_pdf(x))) * h;
  }
  CHECK(d_moment_gaussian(p, q, 3).value == doctest::Approx(sum).epsilon(1e-6));

  const std::vector<double> pd{0.5, 0.25, 0.25};
  const std::vector<double> qd{0.25, 0.25, 0.5};
  const double oracle = 0.5 * 2.0 * 2.0 + 0.25 * 1.0 + 0.25 * 0.25;
  CHECK(d_moment_discrete(pd, qd, 3).value == doctest::Approx(oracle));
}

TEST_CASE("monte-carlo d-moments") {
  const GaussianModel a(0.0, 1.0);
  const GaussianModel b(0.0, 2.0);
  const auto same = d_moment_mc(a, a, 5, 10000, RandomStream{1, 1});
  CHECK(same.value == doctest::Approx(1.0));
  CHECK_FALSE(same.infinite);
  const auto est = d_moment_mc(a, b, 2, 200000, RandomStream{1, 2});
  CHECK(std::abs(est.value - 2.0 / std::sqrt(3.0)) < 4.0 * est.std_err);
  CHECK(est.method == MomentMethod::kMonteCarlo);
  CHECK_FALSE(est.infinite);
  CHECK_FALSE(d_moment_mc(a, b, 5, 200000, RandomStream{1, 4}).infinite);
  // Fifth moment of a wide law against a narrow one has no finite value.
  CHECK(d_moment_mc(b, a, 5, 1000000, RandomStream{1, 3}).infinite);
}

TEST_CASE("two-element pool mismatch matches the closed form") {
  // For N = 2, U_p = 1 iff S_1/S_2 < lambda_1/lambda_2, and P(S_1/S_2 < r) = r/(1+r).
  const std::vector<double> py{0.2, 0.3, 0.5};
  const std::vector<double> p{0.6, 0.3, 0.1};
  const std::vector<double> q{0.1, 0.3, 0.6};
  double oracle = 0.0;
  for (std::size_t y1 = 0; y1 < 3; ++y1) {
    for (std::size_t y2 = 0; y2 < 3; ++y2) {
      const double a = (p[y1] / py[y1]) / (p[y2] / py[y2]);
      const double b = (q[y1] / py[y1]) / (q[y2] / py[y2]);
      oracle += py[y1] * py[y2] * std::abs(a / (1.0 + a) - b / (1.0 + b));
    }
  }
  const auto proposal = std::make_shared<CategoricalModel>(py);
  const auto stats = mismatch_mc({17, 2, proposal}, CategoricalModel(p), CategoricalModel(q), 200000, 2);
  CHECK(stats.trials() == 200000);
  CHECK(std::abs(stats.p_hat() - oracle) < 4.0 * stats.std_err());
}

TEST_CASE("mismatch estimate is independent of the thread count") {
  const auto proposal = std::make_shared<GaussianModel>(0.0, 2.0);
  const GaussianModel p(0.5, 0.5);
  const GaussianModel q(0.3, 0.6);
  const auto a = mismatch_mc({5, 64, proposal}, p, q, 3000, 1);
  const auto b = mismatch_mc({5, 64, proposal}, p, q, 3000, 4);
  CHECK(a.mismatches() == b.mismatches());
}

TEST_CASE("argmin invariance under positive scaling") {
  const auto proposal = std::make_shared<GaussianModel>(0.0, 2.0);
  const GaussianModel p(0.5, 0.5);
  const GaussianModel q(0.3, 0.6);
  const DensityModel p_scaled(1, [&](const Point& y) { return p.log_density(y) + 40.0; });
  const DensityModel q_scaled(1, [&](const Point& y) { return q.log_density(y) - 3.5; });
  for (std::uint64_t t = 0; t < 100; ++t) {
    const ProposalPool pool(RandomStream{2, t}, 128, proposal);
    const auto a = paired_select(pool, p, q);
    const auto b = paired_select(pool, p_scaled, q_scaled);
    CHECK(a.u_p == b.u_p);
    CHECK(a.u_q == b.u_q);
    CHECK(a.matched == b.matched);
  }
}

TEST_CASE("pool-conditional bound dominates the conditional mismatch on a fixed pool") {
  const std::vector<double> ll{std::log(2.0), std::log(0.5), std::log(1.0), std::log(0.5)};
  const std::vector<double> lb{std::log(0.5), std::log(1.5), std::log(1.0), std::log(1.0)};
  for (std::uint64_t k = 1; k <= 4; ++k) {
    const double x = std::exp(ll[k - 1] - lb[k - 1]) * (0.5 + 1.5 + 1.0 + 1.0) / (2.0 + 0.5 + 1.0 + 0.5);
    CHECK(pool_conditional_bound(ll, lb, k) == doctest::Approx(x / (1.0 + x)));
  }
  std::vector<MatchStats> per_k(4);
  for (std::uint64_t t = 0; t < 200000; ++t) {
    const FixedPool pool{RandomStream{31, t}, symbol_points(4)};
    const auto sel = paired_race(pool, [&](const Point& y) { return ll[static_cast<std::size_t>(y[0])]; },
                                 [&](const Point& y) { return lb[static_cast<std::size_t>(y[0])]; });
    per_k[sel.u_p - 1].add(!sel.matched);
  }
  for (std::uint64_t k = 1; k <= 4; ++k) CHECK(per_k[k - 1].wilson().lo <= pool_conditional_bound(ll, lb, k));
}

TEST_CASE("model overload of the pool-conditional bound") {
  const GaussianModel proposal(0.0, 2.0);
  const GaussianModel p(0.5, 0.5);
  const GaussianModel q(0.3, 0.6);
  std::vector<Point> ys;
  std::vector<double> ll;
  std::vector<double> lb;
  for (std::uint64_t i = 0; i < 10; ++i) {
    ys.push_back(Point::scalar(RandomStream{4, 4}.normal(i)));
    ll.push_back(p.log_density(ys.back()) - proposal.log_density(ys.back()));
    lb.push_back(q.log_density(ys.back()) - proposal.log_density(ys.back()));
  }
  for (std::uint64_t k : {1ULL, 5ULL, 10ULL}) {
    CHECK(pool_conditional_bound(ys, k, p, q, proposal) == doctest::Approx(pool_conditional_bound(ll, lb, k)));
  }
  const std::vector<double> same = ll;
  CHECK(pool_conditional_bound(ll, same, 3) == doctest::Approx(0.5));
}

TEST_CASE("matching mu approaches its large-pool limit") {
  double prev_first = 1e300;
  double prev_mu = 1e300;
  for (std::uint64_t e = 3; e <= 12; ++e) {
    const auto r = matching_mu({2.0, 1.0, 2.0, 1.4, 3.0, (1ULL << e) + 1});
    CHECK(r.finite);
    CHECK(std::abs(r.first_term - 1.0) < std::abs(prev_first - 1.0));
    CHECK(r.mu < prev_mu);
    CHECK(r.bound == doctest::Approx(2.0 * r.mu / (1.0 + 2.0 * r.mu)));
    prev_first = r.first_term;
    prev_mu = r.mu;
  }
  CHECK(prev_mu == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS(matching_mu_alt(0.0, 1.0, 2.0, 16, 0.1));
  // Large pools leave only (1+eps)/(1-eps)^2 once the exponential tail has died out.
  CHECK(matching_mu_alt(2.0, 1.0, 2.0, 1ULL << 20, 0.05).mu == doctest::Approx(1.05 / (0.95 * 0.95)).epsilon(1e-3));
  CHECK(matching_mu_alt(2.0, 1.0, 2.0, 1ULL << 12, 0.05).mu > matching_mu_alt(2.0, 1.0, 2.0, 1ULL << 20, 0.05).mu);
  CHECK(mismatch_bound_from_mu(0.0, 1.0) == 0.0);
  CHECK(mismatch_bound_from_mu(std::numeric_limits<double>::infinity(), 1.0) == 1.0);
}

TEST_CASE("bound report csv row") {
  BoundReport r;
  r.variant = "matching_mu";
  r.pool_size = 9;
  r.bound = 0.25;
  CHECK(bound_report_csv_header() == "variant,N,omega,d2,d3,d5,mu,bound,p_hat,ci_lo,ci_hi");
  CHECK(to_csv_row(r) == "matching_mu,9,1,1,1,1,1,0.25,0,0,0");
}
