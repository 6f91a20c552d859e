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

// Spiked population covariance Sigma = I + sum_i d_i v_i v_i^T and synthetic
// data X (M x N, entries of variance 1/N) with Q = Sigma^{1/2} X X^T Sigma^{1/2}.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spikelab/rng.hpp"

namespace spikelab {

enum class LawKind { kGaussian, kTwoPoint };

/// Standardized entry distribution (mean 0, variance 1) before the 1/sqrt(N)
/// scaling.
class EntryLaw {
 public:
  static EntryLaw gaussian();
  /// P(value_hi) = prob_hi, P(value_lo) = 1 - prob_hi; must be standardized.
  static EntryLaw two_point(double value_hi, double value_lo, double prob_hi);
  /// The standardized two-point law with P(hi) = prob_hi.
  static EntryLaw standardized_two_point(double prob_hi);
  /// 1/3 at sqrt(2), 2/3 at -1/sqrt(2).
  static EntryLaw skewed_two_point() { return standardized_two_point(1.0 / 3.0); }

  LawKind kind() const { return kind_; }
  double value_hi() const { return hi_; }
  double value_lo() const { return lo_; }
  double prob_hi() const { return p_; }

  double draw(Stream& s) const;

  bool operator==(const EntryLaw&) const = default;

 private:
  LawKind kind_ = LawKind::kGaussian;
  double hi_ = 0.0;
  double lo_ = 0.0;
  double p_ = 0.0;
};

struct Cumulants {
  double kappa3;
  double kappa4;
};

Cumulants cumulants(const EntryLaw& law);

struct Spike {
  double d;
  int multiplicity = 1;
};

/// M = round(y N).
int dimension_for(int N, double y);

class SpikedModel {
 public:
  /// directions: M x r with orthonormal columns, r = total multiplicity.
  SpikedModel(int M, int N, std::vector<Spike> spikes, Eigen::MatrixXd directions, EntryLaw law);

  /// v_i = e_i.
  static SpikedModel standard_basis(int M, int N, std::vector<Spike> spikes, EntryLaw law);

  int M() const { return M_; }
  int N() const { return N_; }
  double y() const { return static_cast<double>(M_) / N_; }
  int rank() const { return static_cast<int>(d_.size()); }
  const std::vector<Spike>& spikes() const { return spikes_; }
  /// Spike strengths expanded by multiplicity (length r, non-increasing).
  const std::vector<double>& d() const { return d_; }
  const Eigen::MatrixXd& directions() const { return V_; }
  const EntryLaw& law() const { return law_; }

  /// Same spikes and law with different directions.
  SpikedModel with_directions(Eigen::MatrixXd directions) const;

  /// Sigma^{1/2} X computed as X + V diag(sqrt(1+d)-1) V^T X.
  Eigen::MatrixXd apply_sqrt_covariance(const Eigen::MatrixXd& X) const;
  /// Dense Sigma and Sigma^{1/2}; intended for small M.
  Eigen::MatrixXd population_covariance() const;
  Eigen::MatrixXd sqrt_covariance() const;

 private:
  int M_;
  int N_;
  std::vector<Spike> spikes_;
  std::vector<double> d_;
  Eigen::MatrixXd V_;
  EntryLaw law_;
};

/// Entries i.i.d. from the model's law divided by sqrt(N), filled column by column.
Eigen::MatrixXd sample_data(const SpikedModel& model, Stream& stream);

/// Q = Sigma^{1/2} X X^T Sigma^{1/2}, exactly symmetric.
Eigen::MatrixXd sample_covariance(const SpikedModel& model, const Eigen::MatrixXd& X);

/// Throws ConfigError unless the columns of V are orthonormal within tol.
void check_orthonormal_columns(const Eigen::MatrixXd& V, double tol, const std::string& what);

}  // namespace spikelab
