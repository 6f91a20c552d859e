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

// Monte Carlo experiments over scenario configs. Replication k draws its data
// from stream (seed, k) and its mixture critical values from (seed, k) on a
// separate lane, so results do not depend on the number of worker threads.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "spikelab/config.hpp"
#include "spikelab/inference.hpp"
#include "spikelab/spectral.hpp"

namespace spikelab {

struct ReplicationRecord {
  int rep = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool decision = false;
  bool valid = false;
  std::string error;
};

struct ExperimentResult {
  std::string name;
  double phi = 0.0;
  double level = 0.1;
  std::vector<ReplicationRecord> records;
  int valid = 0;
  int invalid = 0;
  int rejections = 0;
  double rate = 0.0;
  double se = 0.0;
  /// Not written to any output file.
  double elapsed_seconds = 0.0;

  std::vector<double> valid_statistics() const;
};

/// Worker count: requested if positive, else SPIKELAB_THREADS, else 1.
int resolve_threads(int requested);

/// Pins the BLAS library to one thread; replications supply the parallelism.
void pin_blas_single_thread();

/// Leading k eigenpairs of one draw. data_out, when given, receives
/// Sigma^{1/2} X (dense sampler only).
SampleSpectrum draw_spectrum(const SpikedModel& model, Sampler sampler, int k, Stream& stream,
                             Eigen::MatrixXd* data_out = nullptr);

/// Runs replication rep of the resolved test.
TestReport run_replication(const ScenarioConfig& c, const ResolvedTest& rt, int rep, Eigen::MatrixXd* data_out = nullptr);

ExperimentResult run_experiment(const ScenarioConfig& c, double phi, int threads);

/// Null run (phi = 0).
ExperimentResult run_null(const ScenarioConfig& c, int threads);

/// One experiment per phi; phi = 0 reuses exactly the null draws.
std::vector<ExperimentResult> run_power(const ScenarioConfig& c, const std::vector<double>& phi_grid, int threads);

struct EcdfResult {
  ExperimentResult experiment;
  std::string reference;
  std::vector<double> sorted;
  std::vector<double> reference_cdf;
  double ks = 0.0;
};

/// Sorted valid statistics with the reference CDF: N(0,1) for equality tests;
/// for orthogonality tests the law of g^T U g / q at the population values
/// (exact scaled chi-square(1) when U is 1 x 1, simulated otherwise).
EcdfResult run_ecdf(const ScenarioConfig& c, int threads);

/// Kolmogorov-Smirnov distance between the empirical CDF of sorted and a
/// reference CDF evaluated at each point.
double ks_distance(const std::vector<double>& sorted, const std::vector<double>& reference_cdf);

double normal_cdf(double x);
double chi2_1_cdf(double x);

void write_type_i_csv(const std::filesystem::path& path, const ExperimentResult& r);
void write_power_csv(const std::filesystem::path& path, const std::vector<ExperimentResult>& rs);
void write_ecdf_csv(const std::filesystem::path& path, const EcdfResult& e);
nlohmann::json summary_json(const ScenarioConfig& c, const ExperimentResult& r);

/// Writes replication 0's data matrix and a hypothesis file that the CLI test
/// command accepts; returns the report of that replication.
TestReport dump_first_replication(const ScenarioConfig& c, const std::filesystem::path& data_csv,
                                  const std::filesystem::path& hypothesis_json);

/// Test of a user data matrix Y (M x N, columns are samples already scaled by
/// 1/sqrt(N), so Q = Y Y^T).
TestReport test_data(const Eigen::MatrixXd& Y, const TestInput& input);

}  // namespace spikelab
