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

#include "spikelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spikelab/errors.hpp"
#include "spikelab/io.hpp"
#include "spikelab/mp_law.hpp"

namespace spikelab {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing field '" + where + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + path + "' has the wrong type");
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  return get_as<T>(require(j, key, where), where + key);
}

template <class T>
T field_or(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  return get_as<T>(j.at(key), where + key);
}

std::vector<int> to_zero_based(const std::vector<int>& v, const std::string& path) {
  std::vector<int> out;
  for (int x : v) {
    if (x < 1) throw ConfigError("field '" + path + "' uses 1-based indices");
    out.push_back(x - 1);
  }
  return out;
}

std::vector<int> to_one_based(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v) out.push_back(x + 1);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
  const auto rows = get_as<std::vector<std::vector<double>>>(j, path);
  if (rows.empty()) throw ConfigError("field '" + path + "' is an empty matrix");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigError("field '" + path + "' has ragged rows");
    for (std::size_t k = 0; k < cols; ++k) A(i, k) = rows[i][k];
  }
  return A;
}

json matrix_to_json(const Eigen::MatrixXd& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < A.cols(); ++k) row.push_back(A(i, k));
    rows.push_back(row);
  }
  return rows;
}

EntryLaw law_from_json(const json& j, const std::string& where) {
  const auto kind = field<std::string>(j, "kind", where);
  if (kind == "gaussian") return EntryLaw::gaussian();
  if (kind == "two-point") {
    return EntryLaw::two_point(field<double>(j, "value_hi", where), field<double>(j, "value_lo", where),
                               field<double>(j, "prob_hi", where));
  }
  throw ConfigError("field '" + where + "kind' must be 'gaussian' or 'two-point'");
}

json law_to_json(const EntryLaw& law) {
  if (law.kind() == LawKind::kGaussian) return {{"kind", "gaussian"}};
  return {{"kind", "two-point"}, {"value_hi", law.value_hi()}, {"value_lo", law.value_lo()}, {"prob_hi", law.prob_hi()}};
}

HypothesisSpec hypothesis_from_json(const json& h, const std::string& where) {
  HypothesisSpec s;
  s.kind = hypothesis_kind_from_string(field<std::string>(h, "kind", where));
  s.I = to_zero_based(field<std::vector<int>>(h, "I", where), where + "I");
  const json& z = require(h, "Z0", where);
  if (z.contains("axes")) {
    s.z0_axes = to_zero_based(get_as<std::vector<int>>(z.at("axes"), where + "Z0.axes"), where + "Z0.axes");
  } else if (z.contains("matrix")) {
    s.z0_matrix = matrix_from_json(z.at("matrix"), where + "Z0.matrix");
  } else {
    throw ConfigError("field '" + where + "Z0' needs 'axes' or 'matrix'");
  }
  if (h.contains("partition")) {
    const json& p = h.at("partition");
    if (p.is_string()) {
      if (p.get<std::string>() != "auto") throw ConfigError("field '" + where + "partition' must be 'auto' or a list");
      s.auto_partition = true;
    } else {
      for (const auto& g : get_as<std::vector<std::vector<int>>>(p, where + "partition")) {
        s.partition.push_back(to_zero_based(g, where + "partition"));
      }
    }
  }
  if (h.contains("known_directions")) {
    s.known_directions = to_zero_based(get_as<std::vector<int>>(h.at("known_directions"), where + "known_directions"),
                                       where + "known_directions");
  }
  return s;
}

json hypothesis_to_json(const HypothesisSpec& s) {
  json h;
  h["kind"] = to_string(s.kind);
  h["I"] = to_one_based(s.I);
  if (s.z0_matrix) {
    h["Z0"] = {{"matrix", matrix_to_json(*s.z0_matrix)}};
  } else {
    h["Z0"] = {{"axes", to_one_based(s.z0_axes)}};
  }
  if (s.auto_partition) {
    h["partition"] = "auto";
  } else if (!s.partition.empty()) {
    json p = json::array();
    for (const auto& g : s.partition) p.push_back(to_one_based(g));
    h["partition"] = p;
  }
  if (!s.known_directions.empty()) h["known_directions"] = to_one_based(s.known_directions);
  return h;
}

// Groups of consecutive indices given by the model multiplicities.
std::vector<std::vector<int>> multiplicity_groups(const std::vector<Spike>& spikes) {
  std::vector<std::vector<int>> groups;
  int next = 0;
  for (const Spike& s : spikes) {
    std::vector<int> g;
    for (int k = 0; k < s.multiplicity; ++k) g.push_back(next++);
    groups.push_back(g);
  }
  return groups;
}

void rotate_columns(Eigen::MatrixXd& A, const std::vector<std::pair<int, int>>& rotations, double phi,
                    const char* what) {
  for (const auto& [col, axis] : rotations) {
    if (col < 0 || col >= A.cols() || axis < 0 || axis >= A.rows()) {
      throw ConfigError(std::string("alternative rotation refers to a missing ") + what + " column or axis");
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(A.rows());
    e(axis) = 1.0;
    A.col(col) = std::cos(phi) * A.col(col) + std::sin(phi) * e;
  }
}

}  // namespace

int ModelSpec::rank() const {
  int r = 0;
  for (const Spike& s : spikes) r += s.multiplicity;
  return r;
}

SpikedModel ModelSpec::build() const {
  if (N < 1) throw ConfigError("model.N must be positive");
  check_aspect_ratio(y);
  const int m = M();
  if (m < 1) throw ConfigError("model: round(y N) must be positive");
  if (directions) {
    if (directions->rows() != m || directions->cols() != rank()) {
      throw ConfigError("model.directions must be an M x r matrix");
    }
    return SpikedModel(m, N, spikes, *directions, law);
  }
  return SpikedModel::standard_basis(m, N, spikes, law);
}

Eigen::MatrixXd HypothesisSpec::z0(int M) const {
  if (z0_matrix) {
    if (z0_matrix->rows() != M) throw ConfigError("hypothesis.Z0.matrix must have M rows");
    return *z0_matrix;
  }
  if (z0_axes.empty()) throw ConfigError("hypothesis.Z0 is empty");
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(M, static_cast<Eigen::Index>(z0_axes.size()));
  for (std::size_t j = 0; j < z0_axes.size(); ++j) {
    if (z0_axes[j] >= M) throw ConfigError("hypothesis.Z0.axes exceeds the dimension M");
    Z(z0_axes[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return Z;
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw ConfigError("field 'name' is empty");
  if (reps < 1) throw ConfigError("field 'reps' must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("field 'level' must lie in (0, 1)");
  if (mixture_draws < 1000) throw ConfigError("field 'mixture_draws' must be at least 1000");
  if (model.spikes.empty()) throw ConfigError("model.spikes is empty");
  if (model.M() < model.rank()) throw ConfigError("model: M must be at least the number of spikes");
  for (double phi : phi_grid) {
    if (!(phi >= 0.0 && phi <= std::numbers::pi / 2 + 1e-12)) throw ConfigError("phi_grid values must lie in [0, pi/2]");
  }
  if (alternative && alternative->target != "model" && alternative->target != "hypothesis") {
    throw ConfigError("alternative.target must be 'model' or 'hypothesis'");
  }
  resolve(*this, alternative ? alternative->phi : 0.0);
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  ScenarioConfig c;
  c.name = field<std::string>(j, "name", "");
  const json& m = require(j, "model", "");
  c.model.N = field<int>(m, "N", "model.");
  c.model.y = field<double>(m, "y", "model.");
  for (const json& s : require(m, "spikes", "model.")) {
    Spike sp;
    sp.d = field<double>(s, "d", "model.spikes[].");
    sp.multiplicity = field_or<int>(s, "multiplicity", "model.spikes[].", 1);
    c.model.spikes.push_back(sp);
  }
  if (m.contains("directions")) {
    const json& d = m.at("directions");
    if (d.is_string()) {
      if (d.get<std::string>() != "standard-basis") {
        throw ConfigError("field 'model.directions' must be 'standard-basis' or a matrix");
      }
    } else {
      c.model.directions = matrix_from_json(d, "model.directions");
    }
  }
  if (m.contains("law")) c.model.law = law_from_json(m.at("law"), "model.law.");
  c.hypothesis = hypothesis_from_json(require(j, "hypothesis", ""), "hypothesis.");
  if (j.contains("alternative")) {
    const json& a = j.at("alternative");
    AlternativeSpec alt;
    alt.target = field_or<std::string>(a, "target", "alternative.", "model");
    for (const auto& p : field<std::vector<std::vector<int>>>(a, "rotations", "alternative.")) {
      if (p.size() != 2 || p[0] < 1 || p[1] < 1) {
        throw ConfigError("field 'alternative.rotations' needs 1-based [column, axis] pairs");
      }
      alt.rotations.emplace_back(p[0] - 1, p[1] - 1);
    }
    alt.phi = field_or<double>(a, "phi", "alternative.", 0.0);
    c.alternative = alt;
  }
  c.reps = field<int>(j, "reps", "");
  c.level = field<double>(j, "level", "");
  c.seed = field<std::uint64_t>(j, "seed", "");
  c.mixture_draws = field_or<int>(j, "mixture_draws", "", 20000);
  const auto sampler = field_or<std::string>(j, "sampler", "", "dense");
  if (sampler == "dense") {
    c.sampler = Sampler::kDense;
  } else if (sampler == "reduced") {
    c.sampler = Sampler::kReduced;
  } else {
    throw ConfigError("field 'sampler' must be 'dense' or 'reduced'");
  }
  c.phi_grid = field_or<std::vector<double>>(j, "phi_grid", "", {});
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    c.outputs.type_i = field_or<std::string>(o, "typeI", "outputs.", c.outputs.type_i);
    c.outputs.power = field_or<std::string>(o, "power", "outputs.", c.outputs.power);
    c.outputs.ecdf = field_or<std::string>(o, "ecdf", "outputs.", c.outputs.ecdf);
    c.outputs.summary = field_or<std::string>(o, "summary", "outputs.", c.outputs.summary);
  }
  c.validate();
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  json spikes = json::array();
  for (const Spike& s : c.model.spikes) spikes.push_back({{"d", s.d}, {"multiplicity", s.multiplicity}});
  j["model"] = {{"N", c.model.N},
                {"y", c.model.y},
                {"spikes", spikes},
                {"directions", c.model.directions ? matrix_to_json(*c.model.directions) : json("standard-basis")},
                {"law", law_to_json(c.model.law)}};
  j["hypothesis"] = hypothesis_to_json(c.hypothesis);
  if (c.alternative) {
    json rot = json::array();
    for (const auto& [col, axis] : c.alternative->rotations) rot.push_back({col + 1, axis + 1});
    j["alternative"] = {{"target", c.alternative->target}, {"rotations", rot}, {"phi", c.alternative->phi}};
  }
  j["reps"] = c.reps;
  j["level"] = c.level;
  j["seed"] = c.seed;
  j["mixture_draws"] = c.mixture_draws;
  j["sampler"] = c.sampler == Sampler::kDense ? "dense" : "reduced";
  if (!c.phi_grid.empty()) j["phi_grid"] = c.phi_grid;
  j["outputs"] = {{"typeI", c.outputs.type_i},
                  {"power", c.outputs.power},
                  {"ecdf", c.outputs.ecdf},
                  {"summary", c.outputs.summary}};
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

ResolvedTest resolve(const ScenarioConfig& c, double phi) {
  SpikedModel model = c.model.build();
  const int M = model.M();
  Eigen::MatrixXd Z0 = c.hypothesis.z0(M);
  if (c.alternative) {
    if (c.alternative->target == "model") {
      Eigen::MatrixXd V = model.directions();
      rotate_columns(V, c.alternative->rotations, phi, "direction");
      model = model.with_directions(V);
    } else {
      rotate_columns(Z0, c.alternative->rotations, phi, "Z0");
    }
  }

  ResolvedTest out{model, {}, {}, c.hypothesis.auto_partition, 0, cumulants(model.law()).kappa4};
  Hypothesis& h = out.hypothesis;
  h.kind = c.hypothesis.kind;
  h.Z0 = Z0;
  h.I = c.hypothesis.I;
  for (int i : h.I) {
    if (i >= model.rank()) throw ConfigError("hypothesis.I refers to a spike the model does not have");
  }
  const int r = model.rank();
  const int max_i = *std::max_element(h.I.begin(), h.I.end());

  if (h.kind == HypothesisKind::kOrthogonality) {
    h.directions = model.directions();
    h.known.assign(r, false);
    if (c.hypothesis.known_directions.empty()) {
      for (int k = 0; k < r; ++k) {
        const bool target = std::find(h.I.begin(), h.I.end(), k) != h.I.end();
        h.known[k] = !target || out.kappa4 != 0.0;
      }
    } else {
      for (int k : c.hypothesis.known_directions) {
        if (k >= r) throw ConfigError("hypothesis.known_directions refers to a missing spike");
        h.known[k] = true;
      }
    }
    for (int k = 0; k < r; ++k) {
      if (!h.known[k]) h.directions.col(k).setZero();
    }
  }

  if (!c.hypothesis.partition.empty()) {
    out.partition = SpikePartition(c.hypothesis.partition);
  } else {
    std::vector<std::vector<int>> groups;
    for (const auto& g : multiplicity_groups(model.spikes())) {
      if (h.kind == HypothesisKind::kEquality && g.front() > max_i) break;
      groups.push_back(g);
    }
    out.partition = SpikePartition(groups);
  }
  out.r_star = out.partition.num_indices();
  if (h.kind == HypothesisKind::kOrthogonality && out.r_star != r) {
    throw ConfigError("orthogonality tests need a partition over every declared spike");
  }
  h.validate(M);
  if (!out.partition.is_union_of_groups(h.I)) throw ConfigError("hypothesis.I must be a union of partition groups");
  return out;
}

TestInput test_input_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("hypothesis file must be a JSON object");
  TestInput t;
  t.hypothesis = hypothesis_from_json(j, "");
  if (j.contains("directions")) t.directions = matrix_from_json(j.at("directions"), "directions");
  t.rank = field_or<int>(j, "rank", "", 0);
  t.kappa4 = field_or<double>(j, "kappa4", "", 0.0);
  t.levels = field_or<std::vector<double>>(j, "levels", "", t.levels);
  t.mixture.draws = field_or<int>(j, "mixture_draws", "", 20000);
  t.mixture.seed = field_or<std::uint64_t>(j, "seed", "", 0);
  t.mixture.stream_id = field_or<std::uint64_t>(j, "stream_id", "", 0);
  return t;
}

json test_input_to_json(const TestInput& t) {
  json j = hypothesis_to_json(t.hypothesis);
  if (t.directions) j["directions"] = matrix_to_json(*t.directions);
  if (t.rank > 0) j["rank"] = t.rank;
  j["kappa4"] = t.kappa4;
  j["levels"] = t.levels;
  j["mixture_draws"] = t.mixture.draws;
  j["seed"] = t.mixture.seed;
  j["stream_id"] = t.mixture.stream_id;
  return j;
}

namespace presets {

namespace {

ScenarioConfig base(const std::string& name, std::vector<Spike> spikes, int N, double y, const EntryLaw& law) {
  ScenarioConfig c;
  c.name = name;
  c.model.N = N;
  c.model.y = y;
  c.model.spikes = std::move(spikes);
  c.model.law = law;
  c.reps = 2000;
  c.level = 0.1;
  c.seed = 20260101;
  c.phi_grid = {0.0, std::numbers::pi / 8, std::numbers::pi / 4, 3 * std::numbers::pi / 8, std::numbers::pi / 2};
  return c;
}

std::string law_tag(const EntryLaw& law) { return law.kind() == LawKind::kGaussian ? "gaussian" : "two-point"; }

ScenarioConfig equality_null(ScenarioConfig c) {
  c.hypothesis.kind = HypothesisKind::kEquality;
  c.hypothesis.I = {0, 1};
  c.hypothesis.z0_axes = {0, 1};
  c.alternative = AlternativeSpec{"model", {{0, 3}, {1, 4}}, 0.0};
  return c;
}

ScenarioConfig orthogonality_null(ScenarioConfig c) {
  c.hypothesis.kind = HypothesisKind::kOrthogonality;
  c.hypothesis.I = {0, 1};
  c.hypothesis.z0_axes = {2, 3};
  c.alternative = AlternativeSpec{"hypothesis", {{0, 0}, {1, 1}}, 0.0};
  return c;
}

}  // namespace

ScenarioConfig scenario_I(double d, int N, double y, const EntryLaw& law) {
  return equality_null(base("scenario-I-" + law_tag(law), {{d + 7, 1}, {7, 1}, {5, 1}}, N, y, law));
}

ScenarioConfig scenario_II(double d, int N, double y, const EntryLaw& law) {
  return equality_null(base("scenario-II-" + law_tag(law), {{d + 5, 2}, {5, 1}}, N, y, law));
}

ScenarioConfig scenario_A(double d, int N, double y, const EntryLaw& law) {
  return orthogonality_null(base("scenario-A-" + law_tag(law), {{d + 7, 1}, {7, 1}, {5, 1}}, N, y, law));
}

ScenarioConfig scenario_B(double d, int N, double y, const EntryLaw& law) {
  return orthogonality_null(base("scenario-B-" + law_tag(law), {{d + 5, 2}, {5, 1}}, N, y, law));
}

ScenarioConfig single_spike_equality(double d, int N, double y) {
  ScenarioConfig c = base("single-equality", {{d, 1}}, N, y, EntryLaw::gaussian());
  c.reps = 8000;
  c.hypothesis.kind = HypothesisKind::kEquality;
  c.hypothesis.I = {0};
  c.hypothesis.z0_axes = {0};
  c.alternative = AlternativeSpec{"model", {{0, 1}}, 0.0};
  return c;
}

ScenarioConfig single_spike_orthogonality(double d, int N, double y) {
  ScenarioConfig c = base("single-orthogonality", {{d, 1}}, N, y, EntryLaw::gaussian());
  c.reps = 8000;
  c.hypothesis.kind = HypothesisKind::kOrthogonality;
  c.hypothesis.I = {0};
  c.hypothesis.z0_axes = {2};
  c.alternative = AlternativeSpec{"hypothesis", {{0, 0}}, 0.0};
  return c;
}

ScenarioConfig by_name(const std::string& name, double d, int N, double y, const EntryLaw& law) {
  if (name == "scenario-I") return scenario_I(d, N, y, law);
  if (name == "scenario-II") return scenario_II(d, N, y, law);
  if (name == "scenario-A") return scenario_A(d, N, y, law);
  if (name == "scenario-B") return scenario_B(d, N, y, law);
  if (name == "single-equality") return single_spike_equality(d, N, y);
  if (name == "single-orthogonality") return single_spike_orthogonality(d, N, y);
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace presets

}  // namespace spikelab
