// Copyright (C) 2026 The spikelab authors
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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "spikelab/config.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/harness.hpp"
#include "spikelab/io.hpp"
#include "spikelab/model.hpp"

using namespace spikelab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spikelab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& out = {}) {
  std::string cmd = std::string(SPIKELAB_CLI) + " " + args;
  cmd += out.empty() ? " > /dev/null 2>&1" : " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ScenarioConfig small_config() {
  auto c = presets::scenario_I(10.0, 200, 0.1);
  c.reps = 24;
  return c;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("reference CDFs and KS distance") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(chi2_1_cdf(2.705543454095404) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(chi2_1_cdf(0.0) == 0.0);
  // Sup over both sides of each jump.
  CHECK(ks_distance({0.0, 1.0}, {0.5, 0.5}) == doctest::Approx(0.5));
  CHECK(ks_distance({1.0}, {0.2}) == doctest::Approx(0.8));
}

TEST_CASE("config JSON round trip and field diagnostics") {
  for (const char* name : {"scenario-I", "scenario-II", "scenario-A", "scenario-B", "single-equality",
                           "single-orthogonality"}) {
    const auto c = presets::by_name(name, 5.0, 500, 1.0, EntryLaw::skewed_two_point());
    const json j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);
  }
  json j = config_to_json(small_config());
  j["model"].erase("N");
  try {
    config_from_json(j);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("model.N") != std::string::npos);
  }
  j = config_to_json(small_config());
  j["reps"] = 0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = config_to_json(small_config());
  j["level"] = 1.5;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = config_to_json(small_config());
  j["model"]["law"] = {{"kind", "two-point"}, {"value_hi", 1.0}, {"value_lo", -1.0}, {"prob_hi", 0.3}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  CHECK_THROWS_AS(presets::by_name("scenario-Z", 1.0, 10, 1.0, EntryLaw::gaussian()), ConfigError);
}

TEST_CASE("golden preset files match the built-in scenarios") {
  const fs::path dir = fs::path(SPIKELAB_SOURCE_DIR) / "presets";
  struct Golden {
    const char* file;
    ScenarioConfig cfg;
  };
  const Golden goldens[] = {
      {"scenario-I_d2_N500_y0.1.json", presets::scenario_I(2.0, 500, 0.1)},
      {"scenario-I-two-point_d10_N500_y0.1.json", presets::scenario_I(10.0, 500, 0.1, EntryLaw::skewed_two_point())},
      {"scenario-II_d50_N500_y1.json", presets::scenario_II(50.0, 500, 1.0)},
      {"scenario-A_d5_N500_y1.json", presets::scenario_A(5.0, 500, 1.0)},
      {"scenario-B_d5_N500_y1.json", presets::scenario_B(5.0, 500, 1.0)},
      {"single-equality_d5_N500_y1.json", presets::single_spike_equality(5.0, 500, 1.0)},
      {"single-orthogonality_d5_N500_y1.json", presets::single_spike_orthogonality(5.0, 500, 1.0)},
  };
  for (const auto& g : goldens) {
    INFO(g.file);
    const json file = json::parse(read_text_file(dir / g.file));
    CHECK(file == config_to_json(g.cfg));
  }
  // Scenario parameters.
  const auto I = presets::scenario_I(2.0, 500, 0.1);
  CHECK(I.model.spikes.size() == 3);
  CHECK(I.model.spikes[0].d == 9.0);
  CHECK(I.model.spikes[1].d == 7.0);
  CHECK(I.model.spikes[2].d == 5.0);
  CHECK(I.model.M() == 50);
  CHECK(I.hypothesis.z0_axes == std::vector<int>{0, 1});
  const auto II = presets::scenario_II(50.0, 500, 1.0);
  CHECK(II.model.spikes[0].d == 55.0);
  CHECK(II.model.spikes[0].multiplicity == 2);
  CHECK(II.model.spikes[1].d == 5.0);
  const auto A = presets::scenario_A(5.0, 500, 1.0);
  CHECK(A.hypothesis.kind == HypothesisKind::kOrthogonality);
  CHECK(A.hypothesis.z0_axes == std::vector<int>{2, 3});
  CHECK(A.hypothesis.I == std::vector<int>{0, 1});
  CHECK(cumulants(presets::scenario_I(10.0, 500, 0.1, EntryLaw::skewed_two_point()).model.law).kappa4 == -1.5);
}

TEST_CASE("alternatives rotate the model or the hypothesis") {
  const auto c = presets::scenario_I(2.0, 500, 0.1);
  const double phi = std::numbers::pi / 2;
  const auto rt = resolve(c, phi);
  CHECK(std::abs(rt.model.directions()(3, 0) - 1.0) < 1e-15);
  CHECK(std::abs(rt.model.directions()(4, 1) - 1.0) < 1e-15);
  CHECK(std::abs(rt.hypothesis.Z0(0, 0) - 1.0) < 1e-15);
  const auto a = resolve(presets::scenario_A(5.0, 500, 0.1), phi);
  CHECK(std::abs(a.hypothesis.Z0(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(a.hypothesis.Z0(1, 1) - 1.0) < 1e-15);
  CHECK(std::abs(a.model.directions()(0, 0) - 1.0) < 1e-15);
  const auto null = resolve(c, 0.0);
  CHECK(null.model.directions().isApprox(Eigen::MatrixXd::Identity(50, 3)));
}

TEST_CASE("runs are deterministic across thread counts") {
  const auto c = small_config();
  const auto a = run_null(c, 1);
  const auto b = run_null(c, 3);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].statistic == b.records[i].statistic);
    CHECK(a.records[i].decision == b.records[i].decision);
  }
  const auto d1 = scratch("det1"), d3 = scratch("det3");
  write_type_i_csv(d1 / "typeI.csv", a);
  write_type_i_csv(d3 / "typeI.csv", b);
  CHECK(read_text_file(d1 / "typeI.csv") == read_text_file(d3 / "typeI.csv"));
  CHECK(summary_json(c, a).dump() == summary_json(c, b).dump());
}

TEST_CASE("aggregation and invalid accounting") {
  auto c = small_config();
  const auto r = run_null(c, 2);
  CHECK(r.valid + r.invalid == c.reps);
  const auto dir = scratch("agg");
  write_type_i_csv(dir / "typeI.csv", r);
  const auto lines = csv_lines(dir / "typeI.csv");
  REQUIRE(lines.size() == static_cast<std::size_t>(c.reps) + 1);
  CHECK(lines[0] == "rep,statistic,decision,valid");
  int valid = 0, rej = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string rep, stat, dec, val;
    std::getline(ss, rep, ',');
    std::getline(ss, stat, ',');
    std::getline(ss, dec, ',');
    std::getline(ss, val, ',');
    valid += val == "1";
    rej += val == "1" && dec == "1";
  }
  CHECK(valid == r.valid);
  CHECK(static_cast<double>(rej) / valid == r.rate);

  // A subcritical configuration marks every replication invalid.
  auto sub = presets::single_spike_equality(0.2, 200, 1.0);
  sub.reps = 5;
  const auto s = run_null(sub, 1);
  CHECK(s.invalid + s.valid == 5);
  CHECK(s.invalid > 0);
  for (const auto& rec : s.records)
    if (!rec.valid) CHECK_FALSE(rec.error.empty());
}

TEST_CASE("power at phi = 0 reuses the null draws") {
  auto c = small_config();
  c.reps = 10;
  const auto null = run_null(c, 1);
  const auto pw = run_power(c, {0.0, std::numbers::pi / 2}, 2);
  REQUIRE(pw.size() == 2);
  CHECK(pw[0].rate == null.rate);
  for (std::size_t i = 0; i < null.records.size(); ++i) CHECK(pw[0].records[i].statistic == null.records[i].statistic);
  CHECK(pw[1].rate == 1.0);
}

TEST_CASE("ECDF output") {
  auto c = presets::single_spike_equality(5.0, 200, 0.1);
  c.reps = 50;
  const auto e = run_ecdf(c, 1);
  CHECK(e.reference == "std_normal");
  CHECK(std::is_sorted(e.sorted.begin(), e.sorted.end()));
  CHECK(e.ks == ks_distance(e.sorted, e.reference_cdf));
  const auto dir = scratch("ecdf");
  write_ecdf_csv(dir / "ecdf.csv", e);
  const auto lines = csv_lines(dir / "ecdf.csv");
  CHECK(lines[0] == "statistic,reference_cdf");
  CHECK(lines.size() == e.sorted.size() + 1);
}

TEST_CASE("CLI subcommands and exit codes") {
  const auto dir = scratch("cli");
  auto c = small_config();
  write_text_file(dir / "cfg.json", config_to_json(c).dump(2));

  CHECK(run_cli("simulate-null " + (dir / "cfg.json").string() + " --reps 10 --out-dir " + (dir / "out").string() +
                " --dump-first") == 0);
  CHECK(csv_lines(dir / "out" / "typeI.csv").size() == 11);
  const json summary = json::parse(read_text_file(dir / "out" / "summary.json"));
  CHECK(summary.at("reps") == 10);

  // The dumped replication reproduces its report through the test command.
  CHECK(run_cli("test --data " + (dir / "out" / "data_rep0.csv").string() + " --hypothesis " +
                    (dir / "out" / "hypothesis_rep0.json").string() + " --out " + (dir / "report.json").string()) == 0);
  const json report = json::parse(read_text_file(dir / "report.json"));
  const auto direct = run_null(c, 1);
  CHECK(report.at("statistic").get<double>() == direct.records[0].statistic);

  // Threads do not change output bytes.
  CHECK(run_cli("simulate-null " + (dir / "cfg.json").string() + " --reps 10 --threads 3 --out-dir " +
                (dir / "out3").string()) == 0);
  CHECK(read_text_file(dir / "out" / "typeI.csv") == read_text_file(dir / "out3" / "typeI.csv"));

  CHECK(run_cli("power " + (dir / "cfg.json").string() + " --reps 5 --phi 0 0.7853981633974483 --out-dir " +
                (dir / "pw").string()) == 0);
  const auto pw = csv_lines(dir / "pw" / "power.csv");
  CHECK(pw.size() == 3);
  CHECK(pw[0] == "phi,rate,se,reps_valid");

  // Critical values of chi-square(1).
  write_text_file(dir / "U.csv", "1\n");
  CHECK(run_cli("critvals --U " + (dir / "U.csv").string() + " --q 1 --draws 20000 --seed 3 --p 0.9",
                dir / "cv.txt") == 0);
  const auto cv = csv_lines(dir / "cv.txt");
  REQUIRE(cv.size() >= 2);
  const double q90 = std::stod(cv.back().substr(cv.back().find(',') + 1));
  CHECK(std::abs(q90 - 2.706) < 0.05);

  // Malformed inputs exit with 2; numerical failures with 3.
  write_text_file(dir / "bad.json", "{ \"name\": ");
  CHECK(run_cli("simulate-null " + (dir / "bad.json").string()) == 2);
  json missing = config_to_json(c);
  missing.erase("seed");
  write_text_file(dir / "missing.json", missing.dump());
  CHECK(run_cli("simulate-null " + (dir / "missing.json").string(), dir / "missing.txt") == 2);
  CHECK(read_text_file(dir / "missing.txt").find("seed") != std::string::npos);
  CHECK(run_cli("simulate-null " + (dir / "nope.json").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  write_text_file(dir / "badU.csv", "1,2\n3\n");
  CHECK(run_cli("critvals --U " + (dir / "badU.csv").string() + " --q 1") == 2);
  write_text_file(dir / "negU.csv", "-1\n");
  CHECK(run_cli("critvals --U " + (dir / "negU.csv").string() + " --q 1") == 3);
}

TEST_CASE("power is monotone in the rotation angle [property]") {
  for (auto c : {presets::scenario_I(50.0, 500, 0.1), presets::scenario_II(50.0, 500, 0.1)}) {
    c.reps = 1000;
    const auto pw = run_power(c, c.phi_grid, resolve_threads(0));
    for (std::size_t k = 1; k < pw.size(); ++k) {
      INFO(c.name << " phi " << pw[k].phi << " rate " << pw[k].rate << " previous " << pw[k - 1].rate);
      const double se = std::hypot(pw[k].se, pw[k - 1].se);
      CHECK(pw[k].rate >= pw[k - 1].rate - 2 * se);
    }
    CHECK(pw.back().rate >= 0.95);
  }
}
