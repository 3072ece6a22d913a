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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "iscsim/csv.hpp"
#include "iscsim/experiments.hpp"

using namespace iscsim::experiments;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool mentions(const std::vector<std::string>& report, const std::string& needle) {
  for (const auto& r : report) {
    if (r.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = Config::parse("# header\n\nN = 2^12, 64 # inline\nvar_w_given_v=0.01,0.005\nmode = full\n");
  CHECK(c.get_uints("N", {}) == std::vector<std::uint64_t>{4096, 64});
  CHECK(c.get_doubles("var_w_given_v", {}) == std::vector<double>{0.01, 0.005});
  CHECK(c.get_string("mode", "") == "full");
  CHECK(c.get_uint("trials", 17) == 17);
  CHECK(c.line_of("var_w_given_v") == 4);
  CHECK_THROWS_AS(Config::parse("N 12\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("N = 1\nN = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("bad key = 1\n"), ConfigError);
  CHECK_THROWS_AS((void)c.get_double("N", 0.0), ConfigError);
  CHECK(Config::parse("a = 1\nb = 2\n").hash() == Config::parse("b = 2\n# x\na = 1\n").hash());
  CHECK(Config::parse("a = 1\n").hash() != Config::parse("a = 2\n").hash());
}

TEST_CASE("validation reports named constraints with locations") {
  CHECK(validate(Kind::kRdCurve, Config::parse("N = 1024\nL = 2\n")).empty());
  CHECK(validate(Kind::kMis, Config::parse("")).empty());
  const auto too_many = validate(Kind::kMatchProb, Config::parse("N = 8\nL = 16\n"));
  CHECK(mentions(too_many, "line 2: field 'L'"));
  CHECK(mentions(too_many, "L <= N"));
  CHECK(mentions(validate(Kind::kChannelSim, Config::parse("N =\n")), "grid must be nonempty"));
  CHECK(mentions(validate(Kind::kBounds, Config::parse("trials = 0\n")), "trials"));
  CHECK(mentions(validate(Kind::kMis, Config::parse("N = 7\n")), "even"));
  CHECK(mentions(validate(Kind::kRdCurve, Config::parse("mode = sometimes\n")), "not one of"));
  CHECK(mentions(validate(Kind::kRdCurve, Config::parse("typo = 1\n")), "unknown key"));
  CHECK(mentions(validate(Kind::kRdCurve, Config::parse("grid = zip\nL = 2,4\nL2 = 3,4,5\n")), "zip grid"));
  CHECK(mentions(validate(Kind::kFeedbackSweep, Config::parse("N = 64\nL = 2\nmode = partial\nL2 = 40\n")), "L2"));
  CHECK_THROWS_AS(run(Kind::kMis, Config::parse("N = 3\n"), {}, std::cerr), ConfigError);
  CHECK(kind_from_string("rd_curve") == Kind::kRdCurve);
  CHECK_FALSE(kind_from_string("nope").has_value());
}

TEST_CASE("reruns write byte-identical csv files") {
  const fs::path dir = fs::temp_directory_path() / "iscsim_unit_csv";
  fs::remove_all(dir);
  struct Case {
    Kind kind;
    std::string text;
  };
  const std::vector<Case> cases{
      {Kind::kChannelSim, "N = 64\ntrials = 1\nseed = 4\n"},
      {Kind::kMatchProb, "N = 64\nL = 2,4\ntrials = 1\nbound_samples = 10\n"},
      {Kind::kRdCurve, "N = 64\nL = 2\ntrials = 1\n"},
      {Kind::kFeedbackSweep, "N = 64\nL = 2\nL2 = 3\nh = 1,2\ntrials = 3\n"},
      {Kind::kMis, "N = 8\ntrials = 1\n"},
      {Kind::kBounds, "N = 9\ntrials = 50\n"},
  };
  std::ostringstream log;
  for (const auto& c : cases) {
    const auto config = Config::parse(c.text);
    RunOptions a;
    a.out_dir = dir / "a";
    a.threads = 1;
    RunOptions b = a;
    b.out_dir = dir / "b";
    b.threads = 3;
    const auto ra = run(c.kind, config, a, log);
    const auto rb = run(c.kind, config, b, log);
    REQUIRE(ra.files.size() == 1);
    const std::string text = slurp(ra.files[0]);
    CHECK(text == slurp(rb.files[0]));
    CHECK(text.starts_with("# iscsim " + to_string(c.kind) + " config_hash=" + config.hash()));
    CHECK(text.find(",config_hash\n") != std::string::npos);
  }
  RunOptions other;
  other.out_dir = dir / "c";
  other.seed = 99;
  const auto rc = run(Kind::kRdCurve, Config::parse("N = 64\nL = 2\ntrials = 1\n"), other, log);
  CHECK(slurp(rc.files[0]).find("seed=99") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("csv number formatting round-trips") {
  using iscsim::csv::format_number;
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::uint64_t{42}) == "42");
  CHECK(iscsim::csv::join({"a", "b,c"}) == "a,\"b,c\"");
}
