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

// Closed-form limiting covariances of outlier eigenvalues and generalized
// components, the equality-test variance V1 and the orthogonality-test
// scaling (q, U).

#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spikelab/model.hpp"
#include "spikelab/rng.hpp"
#include "spikelab/tolerances.hpp"

namespace spikelab {

/// s_{k_1..k_t}(a_1..a_t) = sum_j a_1(j)^{k_1} ... a_t(j)^{k_t}.
double moment_sum(const std::vector<int>& pattern, const std::vector<Eigen::VectorXd>& vectors);
double s4(const Eigen::VectorXd& a);
double s13(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double s22(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double s112(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);
double s1111(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c, const Eigen::VectorXd& d);

/// Spike strengths (true or estimated) with their directions. Columns whose
/// direction is not known carry known[j] == false and arbitrary content.
struct SpikeSet {
  std::vector<double> d;
  Eigen::MatrixXd v;
  std::vector<bool> known;

  static SpikeSet from_model(const SpikedModel& model);
  /// Directions unknown for every spike.
  static SpikeSet strengths_only(int M, std::vector<double> d);

  int rank() const { return static_cast<int>(d.size()); }
  int M() const { return static_cast<int>(v.rows()); }
  bool is_known(int j) const { return known.empty() || known[j]; }
  void validate() const;
};

struct VarsigmaVector {
  Eigen::VectorXd vec;
  double norm = 0.0;
  /// vec / norm, or zero when vec == 0.
  Eigen::VectorXd normalized;
};

/// Weighted projection of w away from the spikes in I, with reference
/// strength d_ref (the common strength of I):
///   sum_{j notin I, j <= r} d_ref sqrt(d_j+1)/(d_ref-d_j) <w,v_j> v_j + (w - sum_{j<=r} <w,v_j> v_j).
/// Spikes listed in assume_orthogonal may have unknown directions; they are
/// taken to satisfy <w, v_j> = 0.
VarsigmaVector varsigma(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::VectorXd& w,
                        const std::vector<int>& assume_orthogonal = {}, const Tolerances& tol = {});

/// Same with an explicit reference strength; spikes in `exclude` are left out
/// of the weighted sum (their strengths may differ from d_ref).
VarsigmaVector varsigma_at(const SpikeSet& spikes, const std::vector<int>& exclude, double d_ref,
                           const Eigen::VectorXd& w, const std::vector<int>& assume_orthogonal = {},
                           const Tolerances& tol = {});

/// A covariance with named coordinates.
struct LimitCovariance {
  std::vector<std::string> labels;
  Eigen::MatrixXd mat;

  int size() const { return static_cast<int>(labels.size()); }
  int index_of(const std::string& label) const;
  double at(const std::string& row, const std::string& col) const;
  double min_eigenvalue() const;
  /// Throws NumericalError unless symmetric and PSD within the tolerances.
  void validate(const Tolerances& tol = {}) const;
};

/// Header row of labels, then the matrix rows.
void write_covariance_csv(std::ostream& os, const LimitCovariance& c);
LimitCovariance read_covariance_csv(std::istream& is);

/// A and B for the group I (0-based, all with the same strength) and probe w.
/// Coordinates: Theta (w_I), Lambda (varsigma_I), Delta_t for t in I, Pi_j for
/// j not in I; labels use 1-based spike numbers.
struct CovAB {
  LimitCovariance A;
  LimitCovariance B;
};
CovAB cov_AB(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::VectorXd& w, double y,
             const Tolerances& tol = {});

/// Joint covariance of the outlier fluctuations Phi_{lk} (l <= k in I) and the
/// generalized-component variables of cov_AB. For a simple spike this is the
/// (r+3)-dimensional matrix with leading coordinate Phi_i.
LimitCovariance cov_C_joint(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::VectorXd& w, double y,
                            double kappa4, const Tolerances& tol = {});

struct V1Spec {
  Eigen::VectorXd alpha;
  LimitCovariance C;
  double value = 0.0;
};

/// Variance of sqrt(N) * (trace(Z0 P_I) - sum_i vartheta(d_i)). d holds the
/// strength assigned to each index of I (equal within a multiplicity group).
/// s22_table(i, j) = s_{2,2}(v_i, v_j) is required when kappa4 != 0.
V1Spec v1(const std::vector<double>& d, const std::optional<Eigen::MatrixXd>& s22_table, double y, double kappa4,
          const Tolerances& tol = {});

/// The reference closed form for |I| equal spikes of strength d;
/// sum_s22 = sum_{k,t in I} s_{2,2}(v_k, v_t).
double v1_all_equal_closed_form(double d, double y, int group_size, double kappa4, double sum_s22,
                                const Tolerances& tol = {});

/// s_{2,2} table of the columns of a basis.
Eigen::MatrixXd s22_table(const Eigen::MatrixXd& basis);

struct QU {
  double q = 0.0;
  /// Coordinates ordered (j, i) with j over the basis columns (outer) and i over I.
  LimitCovariance U0;
  LimitCovariance U;
};

/// q(d) and U(d) for target spikes I (0-based) and the orthonormal basis of Z0.
/// Directions of spikes outside I are required; directions inside I only when
/// kappa4 != 0.
QU q_and_U(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::MatrixXd& basis, double y, double kappa4,
           const Tolerances& tol = {});

/// Sorted draws of g^T U g / q.
class MixtureSample {
 public:
  MixtureSample() = default;
  explicit MixtureSample(std::vector<double> draws);

  std::size_t size() const { return draws_.size(); }
  const std::vector<double>& sorted() const { return draws_; }
  /// Smallest draw x with empirical CDF(x) >= p.
  double quantile(double p) const;
  /// (#{draws >= x} + 1) / (B + 1).
  double tail_p(double x) const;
  double cdf(double x) const;

 private:
  std::vector<double> draws_;
};

MixtureSample simulate_quadratic_form(const LimitCovariance& U, double q, int draws, Stream& stream,
                                      const Tolerances& tol = {});

}  // namespace spikelab
