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

#include "iscsim/iml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "iscsim/csv.hpp"
#include "iscsim/parallel.hpp"

namespace iscsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

PairedSelection paired_select(const ProposalPool& pool, const ProbabilityModel& target_p,
                              const ProbabilityModel& target_q) {
  return paired_race(pool, log_ratio(target_p, pool.proposal()), log_ratio(target_q, pool.proposal()));
}

PairedSelection conditional_paired_select(const ProposalPool& pool, const ProbabilityModel& target_p,
                                          const ProbabilityModel& decoder_q) {
  return paired_select(pool, target_p, decoder_q);
}

double MatchStats::std_err() const noexcept {
  if (trials_ == 0) return 0.0;
  const double p = p_hat();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials_));
}

MatchStats mismatch_mc(const PoolConfig& config, const ProbabilityModel& target_p, const ProbabilityModel& target_q,
                       std::uint64_t trials, unsigned threads) {
  if (!config.proposal) throw std::invalid_argument("mismatch_mc: null proposal");
  const RandomStream root{config.seed, 0x1D1};
  return parallel_trials<MatchStats>(trials, threads, [&](std::uint64_t t, MatchStats& acc) {
    const ProposalPool pool(root.child(t), config.size, config.proposal);
    acc.add(!paired_select(pool, target_p, target_q).matched);
  });
}

MomentEstimate d_moment_gaussian(const GaussianModel& p, const GaussianModel& q, int n) {
  if (n < 1) throw std::invalid_argument("d_moment: order must be >= 1");
  MomentEstimate m;
  m.order = n;
  m.method = MomentMethod::kAnalytic;
  const double dn = n;
  const double sp = p.variance();
  const double sq = q.variance();
  // Integrand p^n q^{1-n} = exp(-a y^2/2 + b y - c/2) times the normalizers.
  const double a = dn / sp - (dn - 1.0) / sq;
  if (!(a > 0.0)) {
    m.value = kInf;
    m.infinite = true;
    return m;
  }
  const double b = dn * p.mean() / sp - (dn - 1.0) * q.mean() / sq;
  const double c = dn * p.mean() * p.mean() / sp - (dn - 1.0) * q.mean() * q.mean() / sq;
  const double two_pi = 2.0 * std::numbers::pi;
  const double log_value = -0.5 * dn * std::log(two_pi * sp) + 0.5 * (dn - 1.0) * std::log(two_pi * sq) +
                           0.5 * std::log(two_pi / a) + 0.5 * b * b / a - 0.5 * c;
  m.value = std::exp(log_value);
  m.infinite = !std::isfinite(m.value);
  return m;
}

MomentEstimate d_moment_discrete(std::span<const double> p, std::span<const double> q, int n) {
  if (p.size() != q.size()) throw std::invalid_argument("d_moment_discrete: alphabet mismatch");
  MomentEstimate m;
  m.order = n;
  m.method = MomentMethod::kAnalytic;
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) {
      m.value = kInf;
      m.infinite = true;
      return m;
    }
    sum += p[j] * std::pow(p[j] / q[j], n - 1);
  }
  m.value = sum;
  return m;
}

MomentEstimate d_moment_mc(const ProbabilityModel& p, const ProbabilityModel& q, int n, std::uint64_t samples,
                           const RandomStream& stream) {
  if (samples < 10) throw std::invalid_argument("d_moment_mc: need at least 10 samples");
  MomentEstimate m;
  m.order = n;
  m.method = MomentMethod::kMonteCarlo;
  m.samples = samples;
  constexpr int kBatches = 10;
  stats::RunningStats acc;
  double record = 0.0;
  int late_records = 0;
  for (int batch = 0; batch < kBatches; ++batch) {
    const std::uint64_t begin = samples * batch / kBatches;
    const std::uint64_t end = samples * (batch + 1) / kBatches;
    double batch_max = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const Point y = p.sample(stream, i + 1);
      const double lp = p.log_density(y);
      const double lq = q.log_density(y);
      if (lq == kNegInf) {
        m.value = kInf;
        m.infinite = true;
        return m;
      }
      const double r = std::exp(static_cast<double>(n - 1) * (lp - lq));
      acc.add(r);
      batch_max = std::max(batch_max, r);
    }
    if (batch_max > record) {
      record = batch_max;
      if (batch >= kBatches / 2) ++late_records;
    }
  }
  m.value = acc.mean();
  m.std_err = acc.std_err();
  const double total = acc.mean() * static_cast<double>(acc.count());
  // A finite moment makes max/sum vanish with the sample size; a single term
  // holding a fixed share of the sum, or records still rising late, marks a heavy tail.
  const double share = total > 0.0 ? record / total : 0.0;
  if (!std::isfinite(m.value) || share > 0.2 || (late_records >= 2 && share > 0.05)) {
    m.infinite = true;
    m.value = kInf;
  }
  return m;
}

double pool_conditional_bound(std::span<const double> log_lambda, std::span<const double> log_beta,
                              std::uint64_t k) {
  if (log_lambda.size() != log_beta.size() || log_lambda.empty()) {
    throw std::invalid_argument("pool_conditional_bound: size mismatch");
  }
  if (k == 0 || k > log_lambda.size()) throw std::out_of_range("pool_conditional_bound: k outside 1..N");
  const double lk = log_lambda[k - 1];
  const double bk = log_beta[k - 1];
  if (bk == kNegInf) return 1.0;
  if (lk == kNegInf) return 0.0;
  LogSumExp sp;
  LogSumExp sq;
  for (double v : log_lambda) sp.add(v);
  for (double v : log_beta) sq.add(v);
  const double lr = (lk - bk) + sq.value() - sp.value();
  // 1 - 1/(1 + e^lr), the logistic function.
  return lr > 0 ? 1.0 / (1.0 + std::exp(-lr)) : std::exp(lr) / (1.0 + std::exp(lr));
}

double pool_conditional_bound(std::span<const Point> pool_samples, std::uint64_t k, const ProbabilityModel& target_p,
                              const ProbabilityModel& target_q, const ProbabilityModel& proposal) {
  std::vector<double> ll(pool_samples.size());
  std::vector<double> lb(pool_samples.size());
  const auto rp = log_ratio(target_p, proposal);
  const auto rq = log_ratio(target_q, proposal);
  for (std::size_t j = 0; j < pool_samples.size(); ++j) {
    ll[j] = rp(pool_samples[j]);
    lb[j] = rq(pool_samples[j]);
  }
  return pool_conditional_bound(ll, lb, k);
}

double mismatch_bound_from_mu(double ratio, double mu) {
  const double x = ratio * mu;
  if (std::isnan(x)) return 1.0;
  if (std::isinf(x)) return 1.0;
  return std::clamp(x / (1.0 + x), 0.0, 1.0);
}

MatchingMuResult matching_mu(const MatchingMuInputs& in) {
  if (in.pool_size < 2) throw std::invalid_argument("matching_mu: needs N >= 2");
  if (!(in.omega >= 1.0)) throw std::invalid_argument("matching_mu: omega must be >= 1");
  MatchingMuResult r;
  const auto n = static_cast<double>(in.pool_size);
  const double nb = n - 1.0;
  const double w = in.omega;
  const double lam = in.lambda / nb;
  const double bet = in.beta / nb;

  r.first_term = (bet + 1.0) / (lam + 1.0);
  const double c = 1.0 + (n + 1.0) / nb * w;
  const double shape = (1.0 + bet) / (1.0 + 2.0 * lam);
  r.k_term = 4.0 * (w - 1.0) / ((1.0 + lam) * (1.0 + lam)) * c *
             std::sqrt(2.0 + 4.0 * shape * shape * (c * c + (w - 1.0) / nb));
  if (!std::isfinite(in.d3) || !std::isfinite(in.d5)) {
    r.finite = false;
    r.l_term = kInf;
    r.mu = kInf;
    r.bound = 1.0;
    return r;
  }
  r.l_term = std::sqrt(w - 1.0) * std::sqrt(std::max(0.0, in.d5 - in.d3 * in.d3)) + (w - 1.0) * in.d3;
  r.mu = r.first_term + (1.0 + lam) * r.k_term / nb + 2.0 * w * (1.0 + lam) * r.l_term / nb;
  r.bound = in.beta == 0.0 ? 1.0 : mismatch_bound_from_mu(in.lambda / in.beta, r.mu);
  return r;
}

MatchingMuResult matching_mu_alt(double lambda, double beta, double omega, std::uint64_t pool_size, double epsilon) {
  if (!(lambda > 0.0)) throw std::invalid_argument("matching_mu_alt: precondition violated, lambda(y_k) must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("matching_mu_alt: epsilon must be in (0,1)");
  if (pool_size < 2) throw std::invalid_argument("matching_mu_alt: needs N >= 2");
  const auto n = static_cast<double>(pool_size);
  const double nb = n - 1.0;
  MatchingMuResult r;
  const double denom = lambda + nb * (1.0 - epsilon);
  r.first_term = (beta + nb * (1.0 + epsilon)) / (denom * denom);
  r.k_term = n * omega / (lambda * lambda) * 2.0 * std::exp(-nb * epsilon * epsilon / (omega * omega));
  r.mu = (nb + lambda) * (r.first_term + r.k_term);
  r.bound = beta == 0.0 ? 1.0 : mismatch_bound_from_mu(lambda / beta, r.mu);
  return r;
}

std::string bound_report_csv_header() { return "variant,N,omega,d2,d3,d5,mu,bound,p_hat,ci_lo,ci_hi"; }

std::string to_csv_row(const BoundReport& r) {
  using csv::format_number;
  return csv::join({r.variant, format_number(r.pool_size), format_number(r.omega), format_number(r.d2),
                    format_number(r.d3), format_number(r.d5), format_number(r.mu), format_number(r.bound),
                    format_number(r.p_hat), format_number(r.ci_lo), format_number(r.ci_hi)});
}

}  // namespace iscsim
