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

#include "iscsim/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "iscsim/ce_isc.hpp"
#include "iscsim/csv.hpp"
#include "iscsim/iml.hpp"
#include "iscsim/mis.hpp"
#include "iscsim/parallel.hpp"
#include "iscsim/wyner_ziv.hpp"

namespace iscsim::experiments {
namespace {

const std::vector<std::pair<Kind, std::string>>& kind_table() {
  static const std::vector<std::pair<Kind, std::string>> table{
      {Kind::kChannelSim, "channel_sim"}, {Kind::kMatchProb, "match_prob"},
      {Kind::kRdCurve, "rd_curve"},       {Kind::kFeedbackSweep, "feedback_sweep"},
      {Kind::kMis, "mis"},                {Kind::kBounds, "bounds"}};
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

bool parse_double(const std::string& text, double& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Accepts plain integers and powers written as 2^k.
bool parse_uint(const std::string& text, std::uint64_t& out) {
  const char* end = text.data() + text.size();
  const auto caret = text.find('^');
  if (caret != std::string::npos) {
    std::uint64_t base = 0;
    std::uint64_t exponent = 0;
    auto r1 = std::from_chars(text.data(), text.data() + caret, base);
    auto r2 = std::from_chars(text.data() + caret + 1, end, exponent);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + caret || r2.ec != std::errc{} || r2.ptr != end) return false;
    out = 1;
    for (std::uint64_t j = 0; j < exponent; ++j) {
      if (base != 0 && out > UINT64_MAX / base) return false;
      out *= base;
    }
    return true;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Collects violations instead of throwing, so validate() can report all of them.
class Checker {
 public:
  Checker(const Config& config, std::vector<std::string>& out) : config_{config}, out_{out} {}

  void fail(const std::string& key, const std::string& message) {
    std::string where = "field '" + key + "'";
    if (const int line = config_.line_of(key); line > 0) where = "line " + std::to_string(line) + ": " + where;
    out_.push_back(where + ": " + message);
  }

  std::vector<double> doubles(const std::string& key, const std::vector<double>& fallback) {
    try {
      return config_.get_doubles(key, fallback);
    } catch (const ConfigError&) {
      fail(key, "expected a comma-separated list of numbers");
      return {};
    }
  }
  std::vector<std::uint64_t> uints(const std::string& key, const std::vector<std::uint64_t>& fallback) {
    try {
      return config_.get_uints(key, fallback);
    } catch (const ConfigError&) {
      fail(key, "expected a comma-separated list of nonnegative integers");
      return {};
    }
  }
  double number(const std::string& key, double fallback) {
    const auto v = doubles(key, {fallback});
    if (v.size() != 1) {
      if (!v.empty()) fail(key, "expected a single number");
      return fallback;
    }
    return v.front();
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const auto v = uints(key, {fallback});
    if (v.size() != 1) {
      if (!v.empty()) fail(key, "expected a single integer");
      return fallback;
    }
    return v.front();
  }

  void nonempty(const std::string& key, std::size_t size) {
    if (size == 0) fail(key, "grid must be nonempty");
  }
  void positive(const std::string& key, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) fail(key, "must be a positive finite number");
  }
  void positive_all(const std::string& key, const std::vector<double>& xs) {
    for (double x : xs) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        fail(key, "every entry must be a positive finite number");
        return;
      }
    }
  }
  void one_of(const std::string& key, const std::string& value, const std::vector<std::string>& allowed) {
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(key, "'" + value + "' is not one of {" + list + "}");
  }

 private:
  const Config& config_;
  std::vector<std::string>& out_;
};

// ---------------------------------------------------------------------------
// Per-kind parameter sets. `read` fills defaults, records violations, and is
// shared by validate() and run().

const std::vector<std::string> kCommonKeys{"seed", "trials"};

struct ChannelSimParams {
  std::vector<std::uint64_t> pool_sizes;
  double var_v = 1.0;
  double var_w_given_v = 0.01;
  std::string coder = "elias_delta";
  double rate_estimate = -1.0;
  std::uint64_t trials = 10000;

  static std::vector<std::string> keys() { return {"N", "var_v", "var_w_given_v", "coder", "rate_estimate"}; }
  void read(const Config& c, Checker& ck) {
    pool_sizes = ck.uints("N", {1ULL << 15});
    ck.nonempty("N", pool_sizes.size());
    for (auto n : pool_sizes) {
      if (n == 0) ck.fail("N", "pool sizes must be >= 1");
    }
    var_v = ck.number("var_v", var_v);
    ck.positive("var_v", var_v);
    var_w_given_v = ck.number("var_w_given_v", var_w_given_v);
    ck.positive("var_w_given_v", var_w_given_v);
    coder = c.get_string("coder", coder);
    ck.one_of("coder", coder, {"zipf", "elias_delta"});
    if (c.has("rate_estimate")) {
      rate_estimate = ck.number("rate_estimate", 0.0);
      if (!(rate_estimate >= 0.0)) ck.fail("rate_estimate", "must be >= 0");
    }
    trials = ck.integer("trials", trials);
  }
};

struct MatchProbParams {
  std::vector<std::uint64_t> pool_sizes;
  std::vector<std::uint64_t> bins;
  std::vector<double> var_w_given_v;
  double var_v = 1.0;
  double var_t_given_v = 0.01;
  std::string bin_mode = "lsb";
  double epsilon = 0.1;
  std::uint64_t bound_samples = 100000;
  std::uint64_t trials = 10000;

  static std::vector<std::string> keys() {
    return {"N", "L", "var_w_given_v", "var_v", "var_t_given_v", "bin_mode", "epsilon", "bound_samples"};
  }
  void read(const Config& c, Checker& ck) {
    pool_sizes = ck.uints("N", {1ULL << 15});
    bins = ck.uints("L", {2, 4, 8, 16, 32});
    var_w_given_v = ck.doubles("var_w_given_v", {0.01});
    ck.nonempty("N", pool_sizes.size());
    ck.nonempty("L", bins.size());
    ck.nonempty("var_w_given_v", var_w_given_v.size());
    ck.positive_all("var_w_given_v", var_w_given_v);
    var_v = ck.number("var_v", var_v);
    ck.positive("var_v", var_v);
    var_t_given_v = ck.number("var_t_given_v", var_t_given_v);
    if (!(var_t_given_v >= 0.0)) ck.fail("var_t_given_v", "must be >= 0");
    bin_mode = c.get_string("bin_mode", bin_mode);
    ck.one_of("bin_mode", bin_mode, {"lsb", "iid"});
    epsilon = ck.number("epsilon", epsilon);
    if (!(epsilon > 0.0 && epsilon < 1.0)) ck.fail("epsilon", "must lie in (0, 1)");
    bound_samples = ck.integer("bound_samples", bound_samples);
    trials = ck.integer("trials", trials);
    check_bins(ck, pool_sizes, bins);
  }

  static void check_bins(Checker& ck, const std::vector<std::uint64_t>& ns, const std::vector<std::uint64_t>& ls) {
    for (auto l : ls) {
      if (l == 0) ck.fail("L", "bin counts must be >= 1");
      for (auto n : ns) {
        if (l > n) {
          ck.fail("L", "constraint L <= N violated (L=" + std::to_string(l) + ", N=" + std::to_string(n) + ")");
        }
      }
    }
  }
};

struct RdParams {
  std::vector<std::uint64_t> pool_sizes;
  std::vector<std::uint64_t> bins;
  std::vector<std::string> modes;
  std::vector<std::uint64_t> second_bins;
  std::vector<std::uint64_t> hash_bits;
  std::vector<double> var_w_given_v;
  std::string grid = "product";
  RdSettings settings;
  std::vector<RdGridPoint> points;

  static std::vector<std::string> keys() {
    return {"N", "L", "mode", "L2", "h", "var_w_given_v", "var_v", "var_t_given_v", "dim", "grid"};
  }
  void read(const Config& c, Checker& ck, const std::string& default_mode) {
    pool_sizes = ck.uints("N", {1ULL << 15});
    bins = ck.uints("L", {2});
    modes = c.get_strings("mode", split_list(default_mode));
    second_bins = ck.uints("L2", {3});
    hash_bits = ck.uints("h", {1});
    var_w_given_v = ck.doubles("var_w_given_v", {0.01});
    ck.nonempty("N", pool_sizes.size());
    ck.nonempty("L", bins.size());
    ck.nonempty("mode", modes.size());
    ck.nonempty("L2", second_bins.size());
    ck.nonempty("h", hash_bits.size());
    ck.nonempty("var_w_given_v", var_w_given_v.size());
    for (const auto& m : modes) ck.one_of("mode", m, {"none", "full", "partial", "hashed"});
    ck.positive_all("var_w_given_v", var_w_given_v);
    settings.var_v = ck.number("var_v", settings.var_v);
    ck.positive("var_v", settings.var_v);
    settings.var_t_given_v = ck.number("var_t_given_v", settings.var_t_given_v);
    if (!(settings.var_t_given_v >= 0.0)) ck.fail("var_t_given_v", "must be >= 0");
    const std::uint64_t dim = ck.integer("dim", 1);
    if (dim < 1 || dim > Point::kMaxDim) ck.fail("dim", "must lie in 1..8");
    settings.dim = static_cast<std::size_t>(std::clamp<std::uint64_t>(dim, 1, Point::kMaxDim));
    settings.trials = ck.integer("trials", 1000);
    grid = c.get_string("grid", grid);
    ck.one_of("grid", grid, {"product", "zip"});
    MatchProbParams::check_bins(ck, pool_sizes, bins);
    build(ck);
  }

  void build(Checker& ck) {
    points.clear();
    const auto make = [&](std::uint64_t n, std::uint64_t l, const std::string& mode, std::uint64_t l2, std::uint64_t h,
                          double var) {
      RdGridPoint g;
      g.pool_size = n;
      g.bins = l;
      g.mode = feedback_mode_from_string(mode);
      g.second_bins = l2;
      g.hash_bits = static_cast<unsigned>(std::min<std::uint64_t>(h, 64));
      g.var_w_given_v = var;
      FeedbackConfig fb{n, l, g.mode, l2, g.hash_bits, 0x5A17};
      for (const auto& v : fb.violations()) {
        if (v == "L must not exceed N") continue;  // reported once by check_bins
        ck.fail(mode == "partial" ? "L2" : mode == "hashed" ? "h" : "L", v);
      }
      points.push_back(g);
    };
    bool valid_modes = std::all_of(modes.begin(), modes.end(), [](const std::string& m) {
      return m == "none" || m == "full" || m == "partial" || m == "hashed";
    });
    if (!valid_modes) return;
    if (grid == "zip") {
      const std::size_t len = std::max({pool_sizes.size(), bins.size(), modes.size(), second_bins.size(),
                                        hash_bits.size(), var_w_given_v.size()});
      const auto pick = [&](const auto& list, const std::string& key, std::size_t j) {
        if (list.size() != 1 && list.size() != len) {
          ck.fail(key, "zip grid needs lists of length 1 or " + std::to_string(len));
          return list.empty() ? decltype(list.front()){} : list.front();
        }
        return list.size() == 1 ? list.front() : list[j];
      };
      for (std::size_t j = 0; j < len; ++j) {
        if (pool_sizes.empty() || bins.empty() || modes.empty() || second_bins.empty() || hash_bits.empty() ||
            var_w_given_v.empty()) {
          return;
        }
        make(pick(pool_sizes, "N", j), pick(bins, "L", j), pick(modes, "mode", j), pick(second_bins, "L2", j),
             pick(hash_bits, "h", j), pick(var_w_given_v, "var_w_given_v", j));
      }
      return;
    }
    for (auto n : pool_sizes) {
      for (auto l : bins) {
        for (double var : var_w_given_v) {
          for (const auto& mode : modes) {
            if (mode == "partial") {
              for (auto l2 : second_bins) make(n, l, mode, l2, 1, var);
            } else if (mode == "hashed") {
              for (auto h : hash_bits) make(n, l, mode, 2, h, var);
            } else {
              make(n, l, mode, 2, 1, var);
            }
          }
        }
      }
    }
  }
};

struct MisParams {
  std::vector<std::uint64_t> pool_sizes;
  MisSettings settings;

  static std::vector<std::string> keys() { return {"N", "offset", "noise_variance"}; }
  void read(const Config&, Checker& ck) {
    pool_sizes = ck.uints("N", {8, 64, 512});
    ck.nonempty("N", pool_sizes.size());
    for (auto n : pool_sizes) {
      if (n < 2 || n % 2 != 0) ck.fail("N", "stratified pools need an even size >= 2");
    }
    settings.offset = ck.number("offset", settings.offset);
    if (!(settings.offset >= 0.0) || !std::isfinite(settings.offset)) ck.fail("offset", "must be >= 0");
    settings.noise_variance = ck.number("noise_variance", settings.noise_variance);
    ck.positive("noise_variance", settings.noise_variance);
    settings.trials = ck.integer("trials", settings.trials);
  }
};

struct BoundsParams {
  std::vector<std::uint64_t> pool_sizes;
  std::vector<double> proposal;
  std::vector<double> p;
  std::vector<double> q;
  double epsilon = 0.1;
  std::uint64_t trials = 100000;

  static std::vector<std::string> keys() { return {"N", "proposal", "p", "q", "epsilon"}; }
  void read(const Config&, Checker& ck) {
    pool_sizes = ck.uints("N", {9, 65, 513});
    ck.nonempty("N", pool_sizes.size());
    for (auto n : pool_sizes) {
      if (n < 2) ck.fail("N", "pool sizes must be >= 2");
    }
    proposal = ck.doubles("proposal", {0.25, 0.25, 0.25, 0.25});
    p = ck.doubles("p", {0.5, 0.25, 0.15, 0.10});
    q = ck.doubles("q", {0.25, 0.4, 0.1, 0.25});
    for (const auto& [key, v] : {std::pair{"proposal", &proposal}, std::pair{"p", &p}, std::pair{"q", &q}}) {
      ck.nonempty(key, v->size());
      const double sum = std::accumulate(v->begin(), v->end(), 0.0);
      if (std::any_of(v->begin(), v->end(), [](double x) { return !(x >= 0.0); }) || std::abs(sum - 1.0) > 1e-9) {
        ck.fail(key, "must be a probability vector");
      }
    }
    if (p.size() != proposal.size() || q.size() != proposal.size()) ck.fail("p", "p, q and proposal need equal sizes");
    for (std::size_t j = 0; j < proposal.size(); ++j) {
      if (proposal[j] == 0.0 && ((j < p.size() && p[j] > 0.0) || (j < q.size() && q[j] > 0.0))) {
        ck.fail("proposal", "must cover the supports of p and q");
        break;
      }
    }
    epsilon = ck.number("epsilon", epsilon);
    if (!(epsilon > 0.0 && epsilon < 1.0)) ck.fail("epsilon", "must lie in (0, 1)");
    trials = ck.integer("trials", trials);
  }
};

std::vector<std::string> allowed_keys(Kind kind) {
  std::vector<std::string> keys = kCommonKeys;
  std::vector<std::string> extra;
  switch (kind) {
    case Kind::kChannelSim:
      extra = ChannelSimParams::keys();
      break;
    case Kind::kMatchProb:
      extra = MatchProbParams::keys();
      break;
    case Kind::kRdCurve:
    case Kind::kFeedbackSweep:
      extra = RdParams::keys();
      break;
    case Kind::kMis:
      extra = MisParams::keys();
      break;
    case Kind::kBounds:
      extra = BoundsParams::keys();
      break;
  }
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

void check_common(const Config& config, Kind kind, Checker& ck) {
  const auto keys = allowed_keys(kind);
  for (const auto& [key, value] : config.values()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) ck.fail(key, "unknown key for " + to_string(kind));
  }
  if (ck.integer("trials", 1) < 1) ck.fail("trials", "must be >= 1");
  (void)ck.integer("seed", 1);
}

// ---------------------------------------------------------------------------
// Output

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& dir, const std::string& name, Kind kind, const std::string& config_hash,
          std::uint64_t seed, const std::string& header)
      : path_{dir / name}, hash_{config_hash} {
    out_ << "# iscsim " << to_string(kind) << " config_hash=" << config_hash << " seed=" << seed << '\n';
    out_ << header << ",config_hash\n";
  }
  void row(const std::string& r) { out_ << r << ',' << hash_ << '\n'; }
  std::filesystem::path write() const {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path().empty() ? "." : path_.parent_path(), ec);
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file " + path_.string());
    f << out_.str();
    if (!f.flush()) throw std::runtime_error("failed writing " + path_.string());
    return path_;
  }

 private:
  std::filesystem::path path_;
  std::string hash_;
  std::ostringstream out_;
};

std::string fmt(double x) { return csv::format_number(x); }
std::string fmt(std::uint64_t x) { return csv::format_number(x); }

// ---------------------------------------------------------------------------
// Runners

void run_channel_sim(const ChannelSimParams& prm, std::uint64_t seed, unsigned threads, CsvFile& csv,
                     std::ostream& log) {
  const double mi = 0.5 * std::log2((prm.var_v + prm.var_w_given_v) / prm.var_w_given_v);
  const double rate_estimate = prm.rate_estimate >= 0.0 ? prm.rate_estimate : mi;
  const IndexCoder coder = prm.coder == "zipf" ? IndexCoder::zipf(IndexCoder::default_zipf_exponent(rate_estimate))
                                               : IndexCoder::elias_delta();
  const auto proposal = std::make_shared<GaussianModel>(0.0, prm.var_v + prm.var_w_given_v);
  const double sd_v = std::sqrt(prm.var_v);
  for (const std::uint64_t n : prm.pool_sizes) {
    const RandomStream root = RandomStream{seed, 0xC5}.child(n);
    const auto acc = parallel_trials<RateAccumulator>(prm.trials, threads, [&](std::uint64_t t, RateAccumulator& a) {
      const double v = sd_v * root.normal(t, 7);
      const GaussianModel target(v, prm.var_w_given_v);
      const ProposalPool pool(root.child(t), n, proposal);
      const EncodeResult enc = encode(pool, target, coder);
      const DecodeResult dec = decode(enc.bits, pool, coder);
      if (dec.index != enc.selection.index) throw std::runtime_error("channel_sim: decoder disagrees with encoder");
      a.add(enc);
    });
    const RateStats s = acc.finish();
    csv.row(csv::join({fmt(n), fmt(s.trials), fmt(s.mean_log2_k), fmt(s.mean_log2_k_std_err), fmt(s.entropy_k_bits),
                       fmt(s.mean_code_length), fmt(s.mean_code_length_std_err), fmt(s.mean_kl_lambda_uniform_bits),
                       fmt(bound_expected_log_rank(s.mean_kl_lambda_uniform_bits)), fmt(mi), prm.coder, fmt(seed)}));
    log << "channel_sim N=" << n << " E[log2 K]=" << s.mean_log2_k << " code=" << s.mean_code_length << '\n';
  }
}

void run_match_prob(const MatchProbParams& prm, std::uint64_t seed, unsigned threads, CsvFile& csv,
                    std::ostream& log) {
  const BinMode mode = prm.bin_mode == "lsb" ? BinMode::kIndexLsb : BinMode::kIidUniform;
  for (const double var : prm.var_w_given_v) {
    const GaussianSideInfoProblem problem(GaussianWZ(prm.var_v, prm.var_t_given_v, var));
    for (const std::uint64_t n : prm.pool_sizes) {
      for (const std::uint64_t l : prm.bins) {
        // Pools and sources are shared across L so the rate sweep is paired.
        const RandomStream root = RandomStream{seed, 0x3A7}.child(n);
        const auto acc = parallel_trials<MatchStats>(prm.trials, threads, [&](std::uint64_t t, MatchStats& a) {
          Point v;
          Point tt;
          problem.sample_source(root.child(t).child(3), 0, v, tt);
          const ProposalPool pool(root.child(t), n, problem.marginal_w(), l, mode);
          const SideInfoEncoding enc = encode_side_info(problem, pool, v);
          bool mismatch = true;
          try {
            mismatch = decode_side_info(problem, pool, tt, enc.label).index != enc.selection.index;
          } catch (const EmptyBinError&) {
          }
          a.add(mismatch);
        });
        const BoundEstimate bound = side_info_mismatch_bound(problem, static_cast<double>(l), prm.epsilon,
                                                             prm.bound_samples, RandomStream{seed, 0xB0D}.child(l));
        const auto ci = acc.wilson();
        csv.row(csv::join({fmt(n), fmt(l), fmt(std::log2(static_cast<double>(l))), fmt(var), prm.bin_mode,
                           fmt(acc.p_hat()), fmt(ci.lo), fmt(ci.hi), fmt(bound.value), fmt(bound.std_err),
                           fmt(acc.trials()), fmt(seed)}));
        log << "match_prob var=" << var << " N=" << n << " L=" << l << " p=" << acc.p_hat() << '\n';
      }
    }
  }
}

void run_rd(const RdParams& prm, std::uint64_t seed, unsigned threads, CsvFile& csv, std::ostream& log) {
  RdSettings settings = prm.settings;
  settings.seed = seed;
  settings.threads = threads;
  for (const RdPoint& p : rd_experiment(prm.points, settings)) {
    csv.row(to_csv_row(p));
    log << "rd N=" << p.pool_size << " L=" << p.bins << " mode=" << to_string(p.mode) << " rate="
        << p.rate_bits_per_sample << " D=" << p.distortion_db << "dB\n";
  }
}

void run_mis(const MisParams& prm, std::uint64_t seed, unsigned threads, CsvFile& csv, std::ostream& log) {
  MisSettings settings = prm.settings;
  settings.seed = seed;
  settings.threads = threads;
  for (const MisRow& r : mis_experiment(prm.pool_sizes, settings)) {
    csv.row(to_csv_row(r));
    log << "mis " << r.scheme << " N=" << r.pool_size << " mean=" << r.mean_dist << " rate=" << r.rate_bits << '\n';
  }
}

struct SymbolMatchStats {
  std::vector<MatchStats> per_symbol;
  void merge(const SymbolMatchStats& other) {
    if (per_symbol.size() < other.per_symbol.size()) per_symbol.resize(other.per_symbol.size());
    for (std::size_t j = 0; j < other.per_symbol.size(); ++j) per_symbol[j].merge(other.per_symbol[j]);
  }
};

void run_bounds(const BoundsParams& prm, std::uint64_t seed, unsigned threads, CsvFile& csv, std::ostream& log) {
  const auto proposal = std::make_shared<CategoricalModel>(prm.proposal);
  const CategoricalModel target_p(prm.p);
  const CategoricalModel target_q(prm.q);
  double omega = 1.0;
  for (std::size_t j = 0; j < prm.proposal.size(); ++j) {
    if (prm.proposal[j] > 0.0) omega = std::max({omega, prm.p[j] / prm.proposal[j], prm.q[j] / prm.proposal[j]});
  }
  const double d2 = d_moment_discrete(prm.proposal, prm.p, 2).value;
  const double d3 = d_moment_discrete(prm.proposal, prm.p, 3).value;
  const double d5 = d_moment_discrete(prm.proposal, prm.p, 5).value;
  const std::size_t symbols = prm.proposal.size();

  for (const std::uint64_t n : prm.pool_sizes) {
    const RandomStream root = RandomStream{seed, 0xB7}.child(n);
    const auto acc =
        parallel_trials<SymbolMatchStats>(prm.trials, threads, [&](std::uint64_t t, SymbolMatchStats& a) {
          if (a.per_symbol.empty()) a.per_symbol.resize(symbols);
          const ProposalPool pool(root.child(t), n, proposal);
          const PairedSelection sel = paired_select(pool, target_p, target_q);
          const auto y = static_cast<std::size_t>(pool.sample(sel.u_p)[0]);
          a.per_symbol[y].add(!sel.matched);
        });
    for (std::size_t y = 0; y < symbols; ++y) {
      if (prm.p[y] == 0.0) continue;
      const MatchStats stats = y < acc.per_symbol.size() ? acc.per_symbol[y] : MatchStats{};
      const double lambda = prm.p[y] / prm.proposal[y];
      const double beta = prm.q[y] / prm.proposal[y];
      const MatchingMuResult mu = matching_mu({lambda, beta, omega, d3, d5, n});
      const MatchingMuResult alt = matching_mu_alt(lambda, beta, omega, n, prm.epsilon);
      const auto ci = stats.wilson();
      for (const auto& [name, res] : {std::pair{"matching_mu", mu}, std::pair{"matching_mu_alt", alt}}) {
        BoundReport r;
        r.variant = std::string(name) + ":y=" + std::to_string(y);
        r.pool_size = n;
        r.omega = omega;
        r.d2 = d2;
        r.d3 = d3;
        r.d5 = d5;
        r.mu = res.mu;
        r.bound = res.bound;
        r.p_hat = stats.p_hat();
        r.ci_lo = ci.lo;
        r.ci_hi = ci.hi;
        csv.row(to_csv_row(r) + "," + fmt(stats.trials()) + "," + fmt(seed));
      }
      log << "bounds N=" << n << " y=" << y << " p=" << stats.p_hat() << " bound=" << mu.bound << '\n';
    }
  }
}

}  // namespace

std::string to_string(Kind kind) {
  for (const auto& [k, name] : kind_table()) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<Kind> kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kind_table()) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, n] : kind_table()) out.push_back(n);
    return out;
  }();
  return names;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    const std::string content = trim(s);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) != 0 || ch == '_';
        })) {
      throw ConfigError("line " + std::to_string(line) + ": invalid key '" + key + "'");
    }
    if (c.values_.contains(key)) {
      throw ConfigError("line " + std::to_string(line) + ": field '" + key + "' repeats line " +
                        std::to_string(c.lines_[key]));
    }
    c.values_[key] = value;
    c.lines_[key] = line;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

int Config::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get_doubles(key, {fallback});
  if (v.size() != 1) throw ConfigError("field '" + key + "': expected a single number");
  return v.front();
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto v = get_uints(key, {fallback});
  if (v.size() != 1) throw ConfigError("field '" + key + "': expected a single integer");
  return v.front();
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(values_.at(key))) {
    double x = 0.0;
    if (!parse_double(item, x)) throw ConfigError("field '" + key + "': '" + item + "' is not a number");
    out.push_back(x);
  }
  return out;
}

std::vector<std::uint64_t> Config::get_uints(const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(values_.at(key))) {
    std::uint64_t x = 0;
    if (!parse_uint(item, x)) throw ConfigError("field '" + key + "': '" + item + "' is not an integer");
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
  if (!has(key)) return fallback;
  return split_list(values_.at(key));
}

std::string Config::hash() const {
  std::string canonical;
  for (const auto& [k, v] : values_) canonical += k + "=" + v + "\n";
  return csv::digest_hex(canonical);
}

std::vector<std::string> validate(Kind kind, const Config& config) {
  std::vector<std::string> out;
  Checker ck(config, out);
  check_common(config, kind, ck);
  switch (kind) {
    case Kind::kChannelSim:
      ChannelSimParams{}.read(config, ck);
      break;
    case Kind::kMatchProb:
      MatchProbParams{}.read(config, ck);
      break;
    case Kind::kRdCurve:
      RdParams{}.read(config, ck, "full");
      break;
    case Kind::kFeedbackSweep:
      RdParams{}.read(config, ck, "full,partial,hashed");
      break;
    case Kind::kMis:
      MisParams{}.read(config, ck);
      break;
    case Kind::kBounds:
      BoundsParams{}.read(config, ck);
      break;
  }
  // Drop exact repeats, keeping first-seen order.
  std::set<std::string> seen;
  std::erase_if(out, [&seen](const std::string& s) { return !seen.insert(s).second; });
  return out;
}

RunResult run(Kind kind, const Config& input, const RunOptions& options, std::ostream& log) {
  Config config = input;
  if (options.seed) config.set("seed", std::to_string(*options.seed));
  if (const auto report = validate(kind, config); !report.empty()) {
    std::string msg;
    for (const auto& line : report) msg += (msg.empty() ? "" : "\n") + line;
    throw ConfigError(msg);
  }
  const std::uint64_t seed = config.get_uint("seed", 1);
  const unsigned threads = std::max(1U, options.threads);
  const std::string hash = config.hash();
  std::vector<std::string> errs;
  Checker ck(config, errs);
  RunResult result;

  switch (kind) {
    case Kind::kChannelSim: {
      ChannelSimParams prm;
      prm.read(config, ck);
      CsvFile csv(options.out_dir, "channel_sim.csv", kind, hash, seed,
                  "N,trials,mean_log2_k,mean_log2_k_se,entropy_k_bits,mean_code_length,mean_code_length_se,"
                  "mean_kl_lambda_u_bits,log_rank_bound_bits,mutual_information_bits,coder,seed");
      run_channel_sim(prm, seed, threads, csv, log);
      result.files.push_back(csv.write());
      break;
    }
    case Kind::kMatchProb: {
      MatchProbParams prm;
      prm.read(config, ck);
      CsvFile csv(options.out_dir, "match_prob.csv", kind, hash, seed,
                  "N,L,rate_bits,sigma2_wv,bin_mode,p_mismatch,ci_lo,ci_hi,bound,bound_se,trials,seed");
      run_match_prob(prm, seed, threads, csv, log);
      result.files.push_back(csv.write());
      break;
    }
    case Kind::kRdCurve:
    case Kind::kFeedbackSweep: {
      RdParams prm;
      prm.read(config, ck, kind == Kind::kRdCurve ? "full" : "full,partial,hashed");
      CsvFile csv(options.out_dir, "rd_points.csv", kind, hash, seed, rd_points_csv_header());
      run_rd(prm, seed, threads, csv, log);
      result.files.push_back(csv.write());
      break;
    }
    case Kind::kMis: {
      MisParams prm;
      prm.read(config, ck);
      CsvFile csv(options.out_dir, "mis_results.csv", kind, hash, seed, mis_results_csv_header());
      run_mis(prm, seed, threads, csv, log);
      result.files.push_back(csv.write());
      break;
    }
    case Kind::kBounds: {
      BoundsParams prm;
      prm.read(config, ck);
      CsvFile csv(options.out_dir, "bounds.csv", kind, hash, seed, bound_report_csv_header() + ",trials,seed");
      run_bounds(prm, seed, threads, csv, log);
      result.files.push_back(csv.write());
      break;
    }
  }
  return result;
}

}  // namespace iscsim::experiments
