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

#include "iscsim/mis.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "iscsim/csv.hpp"
#include "iscsim/parallel.hpp"
#include "iscsim/stats.hpp"

namespace iscsim {

StratifiedPool::StratifiedPool(RandomStream stream, std::uint64_t size, std::shared_ptr<const ProbabilityModel> first,
                               std::shared_ptr<const ProbabilityModel> second)
    : exp_stream_{stream.child(0)},
      sample_stream_{stream.child(1)},
      size_{size},
      first_{std::move(first)},
      second_{std::move(second)} {
  if (size_ == 0 || size_ % 2 != 0) throw std::invalid_argument("StratifiedPool: size must be even and positive");
  if (!first_ || !second_ || !first_->has_sampler() || !second_->has_sampler()) {
    throw std::invalid_argument("StratifiedPool: both proposals need samplers");
  }
}

namespace {

struct SchemeAccumulator {
  stats::RunningStats dist;
  std::map<std::uint64_t, std::uint64_t> symbols;
  double max_abs_error = 0.0;

  void add(double err, std::uint64_t symbol) {
    dist.add(err * err);
    ++symbols[symbol];
    max_abs_error = std::max(max_abs_error, std::abs(err));
  }
  void merge(const SchemeAccumulator& o) {
    dist.merge(o.dist);
    for (const auto& [k, c] : o.symbols) symbols[k] += c;
    max_abs_error = std::max(max_abs_error, o.max_abs_error);
  }
};

struct PairAccumulator {
  SchemeAccumulator ce;
  SchemeAccumulator orc;
  void merge(const PairAccumulator& o) {
    ce.merge(o.ce);
    orc.merge(o.orc);
  }
};

MisRow finish(const std::string& scheme, std::uint64_t n, const SchemeAccumulator& a, const MisSettings& s) {
  MisRow r;
  r.scheme = scheme;
  r.pool_size = n;
  r.mean_dist = a.dist.mean();
  r.var_dist = a.dist.variance();
  r.rate_bits = stats::plugin_entropy_bits(a.symbols);
  r.trials = a.dist.count();
  r.seed = s.seed;
  r.max_abs_error = a.max_abs_error;
  return r;
}

}  // namespace

std::vector<MisRow> mis_experiment(const std::vector<std::uint64_t>& pool_sizes, const MisSettings& settings) {
  if (pool_sizes.empty()) throw std::invalid_argument("mis_experiment: empty N grid");
  const GaussMix mix(settings.offset, settings.noise_variance);
  const auto p1 = mix.component1();
  const auto p2 = mix.component2();
  const auto py = mix.marginal_y();
  const RandomStream root{settings.seed, 0x3153};
  const RandomStream source = root.child(0);

  std::vector<MisRow> rows;
  for (std::uint64_t n : pool_sizes) {
    const RandomStream pools = root.child(1).child(n);
    const PairAccumulator acc =
        parallel_trials<PairAccumulator>(settings.trials, settings.threads, [&](std::uint64_t t, PairAccumulator& a) {
          const double x = mix.sample_x(source, t + 1);
          const GaussianModel target(x, settings.noise_variance);
          const auto lw = log_ratio(target, *py);
          // Same exponential stream for both schemes; only the samples differ.
          const RandomStream ts = pools.child(t);
          const StratifiedPool strat(ts, n, p1, p2);
          const Selection ce = select_index(strat, lw);
          a.ce.add(strat.sample(ce.index)[0] - x, rank_of(strat, ce));
          const ProposalPool iid(ts, n, py);
          const Selection orc = orc_select(iid, lw);
          a.orc.add(iid.sample(orc.index)[0] - x, orc.index);
        });
    rows.push_back(finish("ce-is", n, acc.ce, settings));
    rows.push_back(finish("orc", n, acc.orc, settings));
  }
  return rows;
}

std::string mis_results_csv_header() { return "scheme,N,mean_dist,var_dist,rate_bits,trials,seed"; }

std::string to_csv_row(const MisRow& row) {
  using csv::format_number;
  return csv::join({row.scheme, format_number(row.pool_size), format_number(row.mean_dist),
                    format_number(row.var_dist), format_number(row.rate_bits), format_number(row.trials),
                    format_number(row.seed)});
}

}  // namespace iscsim
