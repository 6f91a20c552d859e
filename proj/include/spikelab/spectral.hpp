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

// Sample eigendecomposition, generalized components and plug-in spike
// estimation.

#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "spikelab/tolerances.hpp"

namespace spikelab {

struct SampleSpectrum {
  /// Leading eigenvalues, non-increasing.
  Eigen::VectorXd mu;
  /// M x k eigenvectors aligned with mu, signs canonicalized.
  Eigen::MatrixXd xi;
  int M = 0;
  int N = 0;

  double y() const { return static_cast<double>(M) / N; }
  int size() const { return static_cast<int>(mu.size()); }
};

/// Flip each column so that its largest-magnitude entry (first on ties) is positive.
void canonicalize_signs(Eigen::MatrixXd& xi);

/// Full eigendecomposition of symmetric Q (M x M) built from N samples.
SampleSpectrum sym_eig(const Eigen::MatrixXd& Q, int N, const Tolerances& tol = {});

/// The k largest eigenpairs of Q.
SampleSpectrum sym_eig_top(const Eigen::MatrixXd& Q, int N, int k, const Tolerances& tol = {});

/// The k largest eigenpairs of Y Y^T for Y = Sigma^{1/2} X (M x N). Uses the
/// N x N Gram matrix when M > N.
SampleSpectrum spectrum_from_data(const Eigen::MatrixXd& Y, int k);

/// The k largest eigenpairs of a symmetric tridiagonal matrix.
void tridiagonal_top(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, int k,
                     Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

/// <w, P_I w> with P_I = sum_{t in I} xi_t xi_t^T. Indices are 0-based.
double generalized_component(const SampleSpectrum& spec, const std::vector<int>& I, const Eigen::VectorXd& w,
                             const Tolerances& tol = {});

/// Disjoint groups of 0-based spike indices covering 0..R-1, listed in order.
class SpikePartition {
 public:
  SpikePartition() = default;
  explicit SpikePartition(std::vector<std::vector<int>> groups);
  static SpikePartition singletons(int R);
  /// Consecutive groups with the given sizes.
  static SpikePartition from_sizes(const std::vector<int>& sizes);

  const std::vector<std::vector<int>>& groups() const { return groups_; }
  int num_indices() const { return n_; }
  int group_of(int index) const { return owner_.at(index); }
  /// Whether I is exactly a union of groups.
  bool is_union_of_groups(const std::vector<int>& I) const;

 private:
  std::vector<std::vector<int>> groups_;
  std::vector<int> owner_;
  int n_ = 0;
};

struct SpikeEstimates {
  std::vector<double> per_group;
  std::vector<double> per_index;
};

/// d-hat = gamma(mean of the group's eigenvalues) for every group.
SpikeEstimates estimate_spikes(const SampleSpectrum& spec, const SpikePartition& partition,
                               const Tolerances& tol = {});

/// Groups the leading r_star eigenvalues by the gap rule in shrunk coordinates.
SpikePartition auto_partition(const SampleSpectrum& spec, int r_star, const Tolerances& tol = {});

/// True when mu_{r+1} (1-based) exceeds lambda_plus + N^(-2/3 + warn_exponent).
bool extra_spike_warning(const SampleSpectrum& spec, int r, const Tolerances& tol = {});

/// One row per eigenpair: index, mu, then the eigenvector entries.
void write_spectrum_csv(std::ostream& os, const SampleSpectrum& spec);

}  // namespace spikelab
