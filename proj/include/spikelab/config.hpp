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

// JSON scenario descriptions and the built-in presets. Spike and axis indices
// are 1-based in JSON and 0-based in memory.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spikelab/inference.hpp"
#include "spikelab/model.hpp"

namespace spikelab {

enum class Sampler { kDense, kReduced };

struct ModelSpec {
  int N = 0;
  double y = 0.0;
  std::vector<Spike> spikes;
  /// Empty means the standard basis.
  std::optional<Eigen::MatrixXd> directions;
  EntryLaw law = EntryLaw::gaussian();

  int M() const { return dimension_for(N, y); }
  int rank() const;
  SpikedModel build() const;
};

struct HypothesisSpec {
  HypothesisKind kind = HypothesisKind::kEquality;
  std::vector<int> I;
  /// Z0 as standard-basis axes or an explicit M x |J| matrix.
  std::vector<int> z0_axes;
  std::optional<Eigen::MatrixXd> z0_matrix;
  /// Explicit groups; empty means "from the model multiplicities".
  std::vector<std::vector<int>> partition;
  bool auto_partition = false;
  /// Orthogonality: spikes whose directions the test may use. Empty means
  /// every spike outside I, plus I itself when kappa4 != 0.
  std::vector<int> known_directions;

  Eigen::MatrixXd z0(int M) const;
};

/// v_k(phi) = cos(phi) v_k + sin(phi) e_axis for each (column, axis) pair.
/// target "model" rotates spike directions; "hypothesis" rotates columns of Z0.
struct AlternativeSpec {
  std::string target = "model";
  std::vector<std::pair<int, int>> rotations;
  double phi = 0.0;
};

struct OutputPaths {
  std::string type_i = "typeI.csv";
  std::string power = "power.csv";
  std::string ecdf = "ecdf.csv";
  std::string summary = "summary.json";
};

struct ScenarioConfig {
  std::string name;
  ModelSpec model;
  HypothesisSpec hypothesis;
  std::optional<AlternativeSpec> alternative;
  int reps = 0;
  double level = 0.1;
  std::uint64_t seed = 0;
  int mixture_draws = 20000;
  Sampler sampler = Sampler::kDense;
  std::vector<double> phi_grid;
  OutputPaths outputs;

  void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);
ScenarioConfig load_config(const std::string& path);

/// Everything a single test call needs, resolved against a model.
struct ResolvedTest {
  SpikedModel model;
  Hypothesis hypothesis;
  SpikePartition partition;
  bool auto_partition = false;
  int r_star = 0;
  double kappa4 = 0.0;
};

/// Applies the alternative (if any) at angle phi and resolves the hypothesis.
ResolvedTest resolve(const ScenarioConfig& c, double phi);

/// Hypothesis description used by the CLI test command.
struct TestInput {
  HypothesisSpec hypothesis;
  /// M x rank directions of the declared spikes; empty means e_1..e_rank.
  std::optional<Eigen::MatrixXd> directions;
  /// Declared number of spikes (orthogonality); 0 means max(I).
  int rank = 0;
  double kappa4 = 0.0;
  std::vector<double> levels{0.01, 0.05, 0.1};
  MixtureSettings mixture;
};

TestInput test_input_from_json(const nlohmann::json& j);
nlohmann::json test_input_to_json(const TestInput& t);

namespace presets {

/// d1 = d + 7, d2 = 7, d3 = 5, v_i = e_i, equality test of Z0 = span(e1, e2).
ScenarioConfig scenario_I(double d, int N, double y, const EntryLaw& law = EntryLaw::gaussian());
/// d1 = d2 = d + 5, d3 = 5, same null.
ScenarioConfig scenario_II(double d, int N, double y, const EntryLaw& law = EntryLaw::gaussian());
/// Scenario I spikes, orthogonality test of span(e1, e2) against Z0 = span(e3, e4).
ScenarioConfig scenario_A(double d, int N, double y, const EntryLaw& law = EntryLaw::gaussian());
/// Scenario II spikes with the Scenario A null.
ScenarioConfig scenario_B(double d, int N, double y, const EntryLaw& law = EntryLaw::gaussian());
/// Single spike, equality test of Z0 = e1.
ScenarioConfig single_spike_equality(double d, int N, double y);
/// Single spike, orthogonality test against Z0 = e3.
ScenarioConfig single_spike_orthogonality(double d, int N, double y);

/// Names accepted by by_name: scenario-I, scenario-II, scenario-A, scenario-B,
/// single-equality, single-orthogonality.
ScenarioConfig by_name(const std::string& name, double d, int N, double y, const EntryLaw& law);

}  // namespace presets

}  // namespace spikelab
