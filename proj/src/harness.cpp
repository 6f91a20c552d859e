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

#include "spikelab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "spikelab/errors.hpp"
#include "spikelab/io.hpp"
#include "spikelab/reduced.hpp"

extern "C" void openblas_set_num_threads(int);

namespace spikelab {

namespace {

int eigenpairs_needed(const SpikedModel& model, int r_star) {
  return std::min(r_star + 1, std::min(model.M(), model.N()));
}

SpikePartition partition_for(const ResolvedTest& rt, const SampleSpectrum& spec) {
  return rt.auto_partition ? auto_partition(spec, rt.r_star) : rt.partition;
}

void finalize(ExperimentResult& r) {
  r.valid = r.invalid = r.rejections = 0;
  for (const auto& rec : r.records) {
    if (rec.valid) {
      ++r.valid;
      r.rejections += rec.decision ? 1 : 0;
    } else {
      ++r.invalid;
    }
  }
  r.rate = r.valid > 0 ? static_cast<double>(r.rejections) / r.valid : std::numeric_limits<double>::quiet_NaN();
  r.se = r.valid > 0 ? std::sqrt(r.rate * (1.0 - r.rate) / r.valid) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<int> known_list(const Hypothesis& h) {
  std::vector<int> out;
  for (std::size_t k = 0; k < h.known.size(); ++k) {
    if (h.known[k]) out.push_back(static_cast<int>(k));
  }
  return out;
}

}  // namespace

std::vector<double> ExperimentResult::valid_statistics() const {
  std::vector<double> out;
  for (const auto& rec : records) {
    if (rec.valid) out.push_back(rec.statistic);
  }
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPIKELAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0 && n <= 1024) return static_cast<int>(n);
    throw ConfigError("SPIKELAB_THREADS must be a positive integer");
  }
  return 1;
}

void pin_blas_single_thread() { openblas_set_num_threads(1); }

SampleSpectrum draw_spectrum(const SpikedModel& model, Sampler sampler, int k, Stream& stream,
                             Eigen::MatrixXd* data_out) {
  if (sampler == Sampler::kReduced) {
    if (!reduced_sampler_applies(model)) {
      throw ConfigError("the reduced sampler needs Gaussian entries and a single simple spike");
    }
    if (data_out) throw ConfigError("the reduced sampler does not produce a data matrix");
    return sample_reduced_spectrum(model, k, stream);
  }
  Eigen::MatrixXd Y = model.apply_sqrt_covariance(sample_data(model, stream));
  SampleSpectrum spec = spectrum_from_data(Y, k);
  if (data_out) *data_out = std::move(Y);
  return spec;
}

TestReport run_replication(const ScenarioConfig& c, const ResolvedTest& rt, int rep, Eigen::MatrixXd* data_out) {
  Stream stream(c.seed, static_cast<std::uint64_t>(rep), Lane::kData);
  const SampleSpectrum spec =
      draw_spectrum(rt.model, c.sampler, eigenpairs_needed(rt.model, rt.r_star), stream, data_out);
  const MixtureSettings mc{c.mixture_draws, c.seed, static_cast<std::uint64_t>(rep)};
  return run_test(spec, rt.hypothesis, partition_for(rt, spec), rt.kappa4, mc, {c.level});
}

ExperimentResult run_experiment(const ScenarioConfig& c, double phi, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const ResolvedTest rt = resolve(c, phi);
  ExperimentResult r;
  r.name = c.name;
  r.phi = phi;
  r.level = c.level;
  r.records.resize(static_cast<std::size_t>(c.reps));

  const int T = std::max(1, std::min(threads, c.reps));
  std::vector<std::exception_ptr> failures(T);
  auto work = [&](int w) {
    try {
      for (int rep = w; rep < c.reps; rep += T) {
        ReplicationRecord& rec = r.records[rep];
        rec.rep = rep;
        try {
          const TestReport tr = run_replication(c, rt, rep);
          rec.statistic = tr.statistic;
          rec.p_value = tr.p_value;
          rec.decision = tr.reject(c.level);
          rec.valid = true;
        } catch (const NumericalError& e) {
          rec.statistic = std::numeric_limits<double>::quiet_NaN();
          rec.p_value = std::numeric_limits<double>::quiet_NaN();
          rec.valid = false;
          rec.error = e.what();
        }
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < T; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  finalize(r);
  r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentResult run_null(const ScenarioConfig& c, int threads) { return run_experiment(c, 0.0, threads); }

std::vector<ExperimentResult> run_power(const ScenarioConfig& c, const std::vector<double>& phi_grid, int threads) {
  if (!c.alternative) throw ConfigError("power runs need an 'alternative' section");
  if (phi_grid.empty()) throw ConfigError("power runs need at least one phi value");
  std::vector<ExperimentResult> out;
  for (double phi : phi_grid) {
    if (!(phi >= 0.0 && phi <= M_PI / 2 + 1e-12)) throw ConfigError("phi values must lie in [0, pi/2]");
    out.push_back(run_experiment(c, phi, threads));
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi2_1_cdf(double x) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(x / 2.0)); }

double ks_distance(const std::vector<double>& sorted, const std::vector<double>& cdf) {
  if (sorted.size() != cdf.size()) throw ConfigError("KS: sizes differ");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    d = std::max(d, std::abs(static_cast<double>(j + 1) / n - cdf[i]));
    d = std::max(d, std::abs(cdf[i] - static_cast<double>(i) / n));
    i = j + 1;
  }
  return d;
}

EcdfResult run_ecdf(const ScenarioConfig& c, int threads) {
  EcdfResult e;
  e.experiment = run_null(c, threads);
  e.sorted = e.experiment.valid_statistics();
  std::sort(e.sorted.begin(), e.sorted.end());
  e.reference_cdf.resize(e.sorted.size());
  const ResolvedTest rt = resolve(c, 0.0);
  if (rt.hypothesis.kind == HypothesisKind::kEquality) {
    e.reference = "std_normal";
    std::transform(e.sorted.begin(), e.sorted.end(), e.reference_cdf.begin(), normal_cdf);
  } else {
    const QU qu = q_and_U(SpikeSet::from_model(rt.model), rt.hypothesis.I, rt.hypothesis.Z0, rt.model.y(), rt.kappa4);
    if (qu.U.size() == 1 && qu.U.mat(0, 0) > 0.0) {
      e.reference = "scaled_chi2_1";
      const double s = qu.q / qu.U.mat(0, 0);
      std::transform(e.sorted.begin(), e.sorted.end(), e.reference_cdf.begin(),
                     [s](double x) { return chi2_1_cdf(x * s); });
    } else {
      e.reference = "simulated_mixture";
      Stream stream(c.seed, 0, Lane::kUser);
      const MixtureSample ref = simulate_quadratic_form(qu.U, qu.q, 200000, stream);
      std::transform(e.sorted.begin(), e.sorted.end(), e.reference_cdf.begin(),
                     [&ref](double x) { return ref.cdf(x); });
    }
  }
  e.ks = ks_distance(e.sorted, e.reference_cdf);
  return e;
}

void write_type_i_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  std::ostringstream os;
  os << "rep,statistic,decision,valid\n";
  for (const auto& rec : r.records) {
    os << rec.rep << ',' << fmt17(rec.statistic) << ',' << (rec.decision ? 1 : 0) << ',' << (rec.valid ? 1 : 0) << '\n';
  }
  write_text_file(path, os.str());
}

void write_power_csv(const std::filesystem::path& path, const std::vector<ExperimentResult>& rs) {
  std::ostringstream os;
  os << "phi,rate,se,reps_valid\n";
  for (const auto& r : rs) os << fmt17(r.phi) << ',' << fmt17(r.rate) << ',' << fmt17(r.se) << ',' << r.valid << '\n';
  write_text_file(path, os.str());
}

void write_ecdf_csv(const std::filesystem::path& path, const EcdfResult& e) {
  std::ostringstream os;
  os << "statistic,reference_cdf\n";
  for (std::size_t i = 0; i < e.sorted.size(); ++i) os << fmt17(e.sorted[i]) << ',' << fmt17(e.reference_cdf[i]) << '\n';
  write_text_file(path, os.str());
}

nlohmann::json summary_json(const ScenarioConfig& c, const ExperimentResult& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json reasons = nlohmann::json::array();
  for (const auto& rec : r.records) {
    if (!rec.valid) reasons.push_back({{"rep", rec.rep}, {"error", rec.error}});
  }
  return {{"name", r.name},
          {"phi", r.phi},
          {"level", r.level},
          {"reps", static_cast<int>(r.records.size())},
          {"valid", r.valid},
          {"invalid", r.invalid},
          {"rejections", r.rejections},
          {"rate", num(r.rate)},
          {"se", num(r.se)},
          {"seed", c.seed},
          {"sampler", c.sampler == Sampler::kDense ? "dense" : "reduced"},
          {"invalid_replications", reasons}};
}

TestReport dump_first_replication(const ScenarioConfig& c, const std::filesystem::path& data_csv,
                                  const std::filesystem::path& hypothesis_json) {
  if (c.sampler != Sampler::kDense) throw ConfigError("--dump-first needs the dense sampler");
  const double phi = c.alternative ? c.alternative->phi : 0.0;
  const ResolvedTest rt = resolve(c, phi);
  Eigen::MatrixXd Y;
  const TestReport rep = run_replication(c, rt, 0, &Y);
  write_matrix_csv(data_csv, Y);

  TestInput in;
  in.hypothesis.kind = rt.hypothesis.kind;
  in.hypothesis.I = rt.hypothesis.I;
  in.hypothesis.z0_matrix = rt.hypothesis.Z0;
  in.hypothesis.auto_partition = rt.auto_partition;
  if (!rt.auto_partition) in.hypothesis.partition = rt.partition.groups();
  if (rt.hypothesis.kind == HypothesisKind::kOrthogonality) {
    in.directions = rt.hypothesis.directions;
    in.rank = rt.model.rank();
    in.hypothesis.known_directions = known_list(rt.hypothesis);
  }
  in.rank = std::max(in.rank, rt.r_star);
  in.kappa4 = rt.kappa4;
  in.levels = {c.level};
  in.mixture = MixtureSettings{c.mixture_draws, c.seed, 0};
  write_text_file(hypothesis_json, test_input_to_json(in).dump(2) + "\n");
  return rep;
}

TestReport test_data(const Eigen::MatrixXd& Y, const TestInput& input) {
  const int M = static_cast<int>(Y.rows());
  const int N = static_cast<int>(Y.cols());
  const HypothesisSpec& hs = input.hypothesis;
  if (hs.I.empty()) throw ConfigError("hypothesis I is empty");
  const int max_i = *std::max_element(hs.I.begin(), hs.I.end());

  Hypothesis h;
  h.kind = hs.kind;
  h.I = hs.I;
  h.Z0 = hs.z0(M);
  int r_star = std::max(input.rank, max_i + 1);
  if (!hs.partition.empty()) r_star = std::max(r_star, SpikePartition(hs.partition).num_indices());
  if (h.kind == HypothesisKind::kOrthogonality) {
    if (input.directions) {
      if (input.directions->rows() != M) throw ConfigError("directions must have M rows");
      h.directions = *input.directions;
    } else {
      h.directions = Eigen::MatrixXd::Identity(M, r_star);
    }
    r_star = static_cast<int>(h.directions.cols());
    h.known.assign(r_star, false);
    if (hs.known_directions.empty()) {
      for (int k = 0; k < r_star; ++k) {
        const bool target = std::find(h.I.begin(), h.I.end(), k) != h.I.end();
        h.known[k] = !target || input.kappa4 != 0.0;
      }
    } else {
      for (int k : hs.known_directions) {
        if (k >= r_star) throw ConfigError("known_directions refers to a missing spike");
        h.known[k] = true;
      }
    }
  }
  if (r_star > std::min(M, N)) throw ConfigError("more declared spikes than available eigenpairs");
  const SampleSpectrum spec = spectrum_from_data(Y, std::min(r_star + 1, std::min(M, N)));
  SpikePartition partition;
  if (hs.auto_partition) {
    partition = auto_partition(spec, r_star);
  } else if (!hs.partition.empty()) {
    partition = SpikePartition(hs.partition);
  } else {
    partition = SpikePartition::singletons(r_star);
  }
  return run_test(spec, h, partition, input.kappa4, input.mixture, input.levels);
}

}  // namespace spikelab
