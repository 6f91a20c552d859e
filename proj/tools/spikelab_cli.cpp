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

// Command-line front end: simulate-null, power, ecdf, test, critvals.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "spikelab/asymptotics.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/harness.hpp"
#include "spikelab/io.hpp"

namespace fs = std::filesystem;
using namespace spikelab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  int threads = 0;
  std::string out_dir = ".";
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--seed", o.seed, "Master seed (overrides the config)");
  app->add_option("--reps", o.reps, "Replications (overrides the config)")->check(CLI::PositiveNumber);
  app->add_option("--threads", o.threads, "Worker threads (default: SPIKELAB_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app->add_option("--out-dir", o.out_dir, "Directory for output files");
}

ScenarioConfig load_with(const std::string& path, const Overrides& o) {
  ScenarioConfig c = load_config(path);
  if (o.seed) c.seed = *o.seed;
  if (o.reps) c.reps = *o.reps;
  c.validate();
  return c;
}

void print_rate(const ExperimentResult& r) {
  std::printf("%s phi=%.6g rate=%.6g se=%.6g valid=%d invalid=%d elapsed=%.2fs\n", r.name.c_str(), r.phi, r.rate, r.se,
              r.valid, r.invalid, r.elapsed_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spikelab: inference for principal components of spiked covariance matrices"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config;
  bool dump_first = false;
  auto* null_cmd = app.add_subcommand("simulate-null", "Type I error run; writes typeI.csv and summary.json");
  null_cmd->add_option("config", config, "Scenario JSON")->required();
  null_cmd->add_flag("--dump-first", dump_first, "Also write replication 0 as data_rep0.csv + hypothesis_rep0.json");
  add_overrides(null_cmd, ov);

  std::vector<double> phis;
  auto* power_cmd = app.add_subcommand("power", "Rejection rate over a grid of alternatives; writes power.csv");
  power_cmd->add_option("config", config, "Scenario JSON")->required();
  power_cmd->add_option("--phi", phis, "Rotation angles in [0, pi/2] (default: the config's phi_grid)");
  add_overrides(power_cmd, ov);

  auto* ecdf_cmd = app.add_subcommand("ecdf", "Sorted null statistics with the reference CDF; writes ecdf.csv");
  ecdf_cmd->add_option("config", config, "Scenario JSON")->required();
  add_overrides(ecdf_cmd, ov);

  std::string data, hypothesis, report_out;
  bool raw = false;
  auto* test_cmd = app.add_subcommand("test", "Run a test on a data matrix");
  test_cmd->add_option("--data", data, "M x N CSV; columns are samples")->required();
  test_cmd->add_option("--hypothesis", hypothesis, "Hypothesis JSON")->required();
  test_cmd->add_flag("--raw", raw, "Data are unscaled; divide by sqrt(N) first");
  test_cmd->add_option("--out", report_out, "Write the JSON report here as well");

  std::string u_path;
  double q = 0.0;
  int draws = 20000;
  std::uint64_t cv_seed = 0;
  std::vector<double> probs{0.9, 0.95, 0.99};
  auto* cv_cmd = app.add_subcommand("critvals", "Quantiles of g^T U g / q by simulation");
  cv_cmd->add_option("--U", u_path, "U as CSV (optional header row of labels)")->required();
  cv_cmd->add_option("--q", q, "Normalizer q")->required();
  cv_cmd->add_option("--draws", draws, "Number of draws")->default_val(20000);
  cv_cmd->add_option("--seed", cv_seed, "Seed")->default_val(0);
  cv_cmd->add_option("--p", probs, "Quantile levels");

  std::string preset_name, preset_law = "gaussian";
  double preset_d = 0.0, preset_y = 0.0;
  int preset_N = 0;
  auto* preset_cmd = app.add_subcommand("preset", "Print a built-in scenario config as JSON");
  preset_cmd->add_option("name", preset_name, "scenario-I, scenario-II, scenario-A, scenario-B, single-equality, single-orthogonality")
      ->required();
  preset_cmd->add_option("--d", preset_d, "Scenario parameter d")->required();
  preset_cmd->add_option("--N", preset_N, "Sample size")->required();
  preset_cmd->add_option("--y", preset_y, "Aspect ratio M/N")->required();
  preset_cmd->add_option("--law", preset_law, "gaussian or two-point")->check(CLI::IsMember({"gaussian", "two-point"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    pin_blas_single_thread();
    if (null_cmd->parsed()) {
      const ScenarioConfig c = load_with(config, ov);
      const fs::path out(ov.out_dir);
      const ExperimentResult r = run_null(c, resolve_threads(ov.threads));
      write_type_i_csv(out / c.outputs.type_i, r);
      write_text_file(out / c.outputs.summary, summary_json(c, r).dump(2) + "\n");
      if (dump_first) dump_first_replication(c, out / "data_rep0.csv", out / "hypothesis_rep0.json");
      print_rate(r);
    } else if (power_cmd->parsed()) {
      const ScenarioConfig c = load_with(config, ov);
      const auto rs = run_power(c, phis.empty() ? c.phi_grid : phis, resolve_threads(ov.threads));
      write_power_csv(fs::path(ov.out_dir) / c.outputs.power, rs);
      for (const auto& r : rs) print_rate(r);
    } else if (ecdf_cmd->parsed()) {
      const ScenarioConfig c = load_with(config, ov);
      const EcdfResult e = run_ecdf(c, resolve_threads(ov.threads));
      write_ecdf_csv(fs::path(ov.out_dir) / c.outputs.ecdf, e);
      std::printf("%s reference=%s ks=%.6g n=%zu\n", c.name.c_str(), e.reference.c_str(), e.ks, e.sorted.size());
    } else if (test_cmd->parsed()) {
      Eigen::MatrixXd Y = read_matrix_csv(fs::path(data));
      if (raw) Y /= std::sqrt(static_cast<double>(Y.cols()));
      nlohmann::json hj;
      try {
        hj = nlohmann::json::parse(read_text_file(hypothesis));
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + hypothesis + "': " + e.what());
      }
      const TestReport rep = test_data(Y, test_input_from_json(hj));
      const std::string text = rep.to_json().dump(2) + "\n";
      std::cout << text;
      if (!report_out.empty()) write_text_file(report_out, text);
    } else if (preset_cmd->parsed()) {
      const EntryLaw law = preset_law == "gaussian" ? EntryLaw::gaussian() : EntryLaw::skewed_two_point();
      const ScenarioConfig c = presets::by_name(preset_name, preset_d, preset_N, preset_y, law);
      c.validate();
      std::cout << config_to_json(c).dump(2) << "\n";
    } else if (cv_cmd->parsed()) {
      LimitCovariance U;
      U.mat = read_matrix_csv(fs::path(u_path), true);
      for (Eigen::Index i = 0; i < U.mat.cols(); ++i) U.labels.push_back("g" + std::to_string(i + 1));
      if (U.mat.rows() != U.mat.cols()) throw ConfigError("U must be square");
      Stream stream(cv_seed, 0, Lane::kMixture);
      const MixtureSample s = simulate_quadratic_form(U, q, draws, stream);
      std::printf("p,quantile\n");
      for (double p : probs) std::printf("%s,%s\n", fmt17(p).c_str(), fmt17(s.quantile(p)).c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
