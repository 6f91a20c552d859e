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

#include "spikelab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "spikelab/errors.hpp"
#include "spikelab/model.hpp"
#include "spikelab/mp_law.hpp"

namespace spikelab {

namespace {

// Squared Frobenius norm of Z0^T xi_I.
double projection_mass(const SampleSpectrum& spec, const Eigen::MatrixXd& Z0, const std::vector<int>& I) {
  double s = 0.0;
  for (int t : I) s += (Z0.transpose() * spec.xi.col(t)).squaredNorm();
  return s;
}

void check_target(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition) {
  if (hyp.Z0.rows() != spec.M) throw ConfigError("hypothesis basis does not match the data dimension");
  for (int t : hyp.I) {
    if (t >= partition.num_indices()) throw ConfigError("target index is not covered by the spike partition");
  }
  if (!partition.is_union_of_groups(hyp.I)) throw ConfigError("target set must be a union of multiplicity groups");
  if (partition.num_indices() > spec.size()) throw ConfigError("spectrum has fewer eigenpairs than declared spikes");
}

std::string level_key(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", level);
  return buf;
}

}  // namespace

std::string to_string(HypothesisKind k) { return k == HypothesisKind::kEquality ? "equality" : "orthogonality"; }

HypothesisKind hypothesis_kind_from_string(const std::string& s) {
  if (s == "equality") return HypothesisKind::kEquality;
  if (s == "orthogonality") return HypothesisKind::kOrthogonality;
  throw ConfigError("unknown hypothesis kind '" + s + "'");
}

void Hypothesis::validate(int M, const Tolerances& tol) const {
  if (Z0.rows() != M || Z0.cols() < 1) throw ConfigError("Z0 must be an M x |J| matrix with |J| >= 1");
  check_orthonormal_columns(Z0, tol.basis_orthonormal, "Z0");
  if (I.empty()) throw ConfigError("target set I is empty");
  std::vector<int> s = I;
  std::sort(s.begin(), s.end());
  if (s.front() < 0 || std::adjacent_find(s.begin(), s.end()) != s.end()) throw ConfigError("invalid target set I");
  if (kind == HypothesisKind::kEquality && static_cast<int>(I.size()) != Z0.cols()) {
    throw ConfigError("equality test needs rank(Z0) = |I|");
  }
  if (kind == HypothesisKind::kOrthogonality) {
    if (directions.rows() != M) throw ConfigError("orthogonality test needs the declared spike directions");
    if (!known.empty() && static_cast<Eigen::Index>(known.size()) != directions.cols()) {
      throw ConfigError("known-direction mask has the wrong length");
    }
  }
}

bool SeparationDiagnostics::leak_ok() const {
  return std::all_of(groups.begin(), groups.end(), [](const GroupSeparation& g) { return g.leak_ok; });
}

bool SeparationDiagnostics::gap_ok() const {
  return std::all_of(groups.begin(), groups.end(), [](const GroupSeparation& g) { return g.gap_ok; });
}

SeparationDiagnostics check_assumption_separation(const std::vector<double>& d_hat, const SpikePartition& partition,
                                                  double y, int N, const Tolerances& tol) {
  const auto& groups = partition.groups();
  if (d_hat.size() != groups.size()) throw ConfigError("one strength per group is required");
  const double n = N;
  SeparationDiagnostics out;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    GroupSeparation g;
    g.group = groups[a];
    const double di = d_hat[a];
    g.gap = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (b == a) continue;
      const double dj = d_hat[b];
      const double diff = di - dj;
      g.leak += static_cast<double>(groups[b].size()) * di * dj / (diff * diff) / n;
      g.gap = std::min(g.gap, std::abs(diff));
    }
    g.leak_bound = std::pow(n, -tol.eps0) / (std::sqrt(n) * (di * di - y));
    g.gap_bound = std::pow(di, 1.5) / std::sqrt(di - std::sqrt(y)) * std::pow(n, -0.5 + tol.eps0);
    g.leak_ok = g.leak <= g.leak_bound;
    g.gap_ok = g.gap > g.gap_bound;
    out.groups.push_back(std::move(g));
  }
  return out;
}

void TestReport::decide(const std::vector<double>& levels) {
  decisions.clear();
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("test levels must lie in (0, 1)");
    decisions[a] = reject(a);
  }
}

nlohmann::json TestReport::to_json() const {
  nlohmann::json j;
  j["test"] = to_string(kind);
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["raw"] = raw;
  j["scale"] = scale;
  j["reference"] = {{"type", reference}};
  if (reference == "simulated_mixture") {
    j["reference"]["draws"] = mixture.draws;
    j["reference"]["seed"] = mixture.seed;
    j["reference"]["stream_id"] = mixture.stream_id;
  }
  j["estimates"] = estimates;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : separation.groups) {
    std::vector<int> one_based;
    for (int t : g.group) one_based.push_back(t + 1);
    groups.push_back({{"group", one_based},
                      {"leak", g.leak},
                      {"leak_bound", g.leak_bound},
                      {"leak_ok", g.leak_ok},
                      {"gap", std::isfinite(g.gap) ? nlohmann::json(g.gap) : nlohmann::json(nullptr)},
                      {"gap_bound", g.gap_bound},
                      {"gap_ok", g.gap_ok}});
  }
  j["diagnostics"] = {{"separation", separation.pass() ? "pass" : "warn"},
                      {"extra_spike", extra_spike},
                      {"groups", groups}};
  nlohmann::json dec = nlohmann::json::object();
  for (const auto& [level, r] : decisions) dec[level_key(level)] = r;
  j["decisions"] = dec;
  return j;
}

TestReport test_equality(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition,
                         double kappa4, const std::vector<double>& levels, const Tolerances& tol) {
  if (hyp.kind != HypothesisKind::kEquality) throw ConfigError("not an equality hypothesis");
  hyp.validate(spec.M, tol);
  check_target(spec, hyp, partition);

  const SpikeEstimates est = estimate_spikes(spec, partition, tol);
  const double y = spec.y();
  std::vector<int> I = hyp.I;
  std::sort(I.begin(), I.end());

  TestReport rep;
  rep.kind = HypothesisKind::kEquality;
  rep.estimates = est.per_index;
  std::vector<double> d;
  double centre = 0.0;
  for (int i : I) {
    d.push_back(est.per_index[i]);
    centre += vartheta(est.per_index[i], y, tol);
  }
  rep.raw = projection_mass(spec, hyp.Z0, I) - centre;
  std::optional<Eigen::MatrixXd> table;
  if (kappa4 != 0.0) table = s22_table(hyp.Z0);
  const V1Spec v = v1(d, table, y, kappa4, tol);
  if (!(v.value > 0.0) || !std::isfinite(v.value)) throw NumericalError("V1 is not positive");
  rep.scale = v.value;
  rep.statistic = std::sqrt(static_cast<double>(spec.N)) * rep.raw / std::sqrt(v.value);
  rep.p_value = std::erfc(std::abs(rep.statistic) / std::sqrt(2.0));
  rep.reference = "std_normal";
  rep.separation = check_assumption_separation(est.per_group, partition, y, spec.N, tol);
  rep.extra_spike = extra_spike_warning(spec, partition.num_indices(), tol);
  rep.decide(levels);
  return rep;
}

TestReport test_orthogonality(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition,
                              double kappa4, const MixtureSettings& mc, const std::vector<double>& levels,
                              const Tolerances& tol) {
  if (hyp.kind != HypothesisKind::kOrthogonality) throw ConfigError("not an orthogonality hypothesis");
  hyp.validate(spec.M, tol);
  check_target(spec, hyp, partition);
  if (hyp.directions.cols() != partition.num_indices()) {
    throw ConfigError("the partition must cover every declared spike");
  }

  const SpikeEstimates est = estimate_spikes(spec, partition, tol);
  const double y = spec.y();
  SpikeSet spikes;
  spikes.d = est.per_index;
  spikes.v = hyp.directions;
  spikes.known = hyp.known;

  TestReport rep;
  rep.kind = HypothesisKind::kOrthogonality;
  rep.estimates = est.per_index;
  rep.raw = projection_mass(spec, hyp.Z0, hyp.I);
  const QU qu = q_and_U(spikes, hyp.I, hyp.Z0, y, kappa4, tol);
  if (!(qu.q > 0.0)) throw NumericalError("q is not positive");
  rep.scale = qu.q;
  rep.statistic = static_cast<double>(spec.N) * rep.raw / qu.q;
  Stream stream(mc.seed, mc.stream_id, Lane::kMixture);
  const MixtureSample sample = simulate_quadratic_form(qu.U, qu.q, mc.draws, stream, tol);
  rep.p_value = sample.tail_p(rep.statistic);
  rep.reference = "simulated_mixture";
  rep.mixture = mc;
  rep.separation = check_assumption_separation(est.per_group, partition, y, spec.N, tol);
  rep.extra_spike = extra_spike_warning(spec, partition.num_indices(), tol);
  rep.decide(levels);
  return rep;
}

TestReport run_test(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition, double kappa4,
                    const MixtureSettings& mc, const std::vector<double>& levels, const Tolerances& tol) {
  return hyp.kind == HypothesisKind::kEquality ? test_equality(spec, hyp, partition, kappa4, levels, tol)
                                               : test_orthogonality(spec, hyp, partition, kappa4, mc, levels, tol);
}

}  // namespace spikelab
