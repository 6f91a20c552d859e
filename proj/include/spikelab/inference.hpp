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

// Eigenspace equality and orthogonality tests built on plug-in spike
// estimates.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spikelab/asymptotics.hpp"
#include "spikelab/spectral.hpp"
#include "spikelab/tolerances.hpp"

namespace spikelab {

enum class HypothesisKind { kEquality, kOrthogonality };

std::string to_string(HypothesisKind k);
HypothesisKind hypothesis_kind_from_string(const std::string& s);

struct Hypothesis {
  HypothesisKind kind = HypothesisKind::kEquality;
  /// M x |J| orthonormal basis of Z0.
  Eigen::MatrixXd Z0;
  /// Target spike indices, 0-based.
  std::vector<int> I;
  /// Orthogonality only: directions of all declared spikes (M x r) and which
  /// columns are known. Directions of spikes outside I are required.
  Eigen::MatrixXd directions;
  std::vector<bool> known;

  void validate(int M, const Tolerances& tol = {}) const;
};

struct GroupSeparation {
  std::vector<int> group;
  double leak = 0.0;        // (1/N) sum_{j outside} d_i d_j / (d_i - d_j)^2
  double leak_bound = 0.0;  // N^{-eps0} / (sqrt(N) (d_i^2 - y))
  double gap = 0.0;         // min distance to another group, +inf if none
  double gap_bound = 0.0;   // d^{3/2} (d - sqrt(y))^{-1/2} N^{-1/2 + eps0}
  bool leak_ok = true;
  bool gap_ok = true;
};

struct SeparationDiagnostics {
  std::vector<GroupSeparation> groups;
  bool leak_ok() const;
  bool gap_ok() const;
  bool pass() const { return leak_ok() && gap_ok(); }
};

/// Evaluates the chi-square suppression condition and the non-overlapping gap
/// for each group, using per-group strengths d_hat.
SeparationDiagnostics check_assumption_separation(const std::vector<double>& d_hat_per_group,
                                                  const SpikePartition& partition, double y, int N,
                                                  const Tolerances& tol = {});

struct MixtureSettings {
  int draws = 20000;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

struct TestReport {
  HypothesisKind kind = HypothesisKind::kEquality;
  double statistic = 0.0;
  double p_value = 1.0;
  /// Unnormalized statistic (the centred trace or the projection mass) and its
  /// normalizer (V1 or q).
  double raw = 0.0;
  double scale = 0.0;
  std::string reference;  // "std_normal" or "simulated_mixture"
  MixtureSettings mixture;
  std::vector<double> estimates;  // d-hat per declared spike index
  SeparationDiagnostics separation;
  bool extra_spike = false;
  std::map<double, bool> decisions;

  bool reject(double level) const { return p_value <= level; }
  void decide(const std::vector<double>& levels);
  nlohmann::json to_json() const;
};

/// Two-sided test of Z_I = Z0 with statistic sqrt(N) T / sqrt(V1(d-hat)).
/// The partition must cover the indices of I and I must be a union of groups.
TestReport test_equality(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition,
                         double kappa4, const std::vector<double>& levels = {0.01, 0.05, 0.1},
                         const Tolerances& tol = {});

/// Upper-tail test of Z_I orthogonal to Z0 with statistic N T2 / q(d-hat)
/// against simulated draws of g^T U g / q. The partition covers all r
/// declared spikes.
TestReport test_orthogonality(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition,
                              double kappa4, const MixtureSettings& mc,
                              const std::vector<double>& levels = {0.01, 0.05, 0.1}, const Tolerances& tol = {});

/// Dispatches on hyp.kind.
TestReport run_test(const SampleSpectrum& spec, const Hypothesis& hyp, const SpikePartition& partition, double kappa4,
                    const MixtureSettings& mc, const std::vector<double>& levels = {0.01, 0.05, 0.1},
                    const Tolerances& tol = {});

}  // namespace spikelab
