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

#include "spikelab/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "spikelab/errors.hpp"
#include "spikelab/io.hpp"
#include "spikelab/mp_law.hpp"

namespace spikelab {

namespace {

void check_symmetric(const Eigen::MatrixXd& Q, const Tolerances& tol) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) throw ConfigError("eigensolver input must be square and non-empty");
  if (!Q.allFinite()) throw ConfigError("eigensolver input has non-finite entries");
  const double scale = Q.cwiseAbs().maxCoeff();
  const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol.symmetry_rel * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "eigensolver input is not symmetric (max asymmetry " << asym << ")";
    throw ConfigError(os.str());
  }
}

// Top `count` eigenpairs (all when count == n) of symmetric A, descending.
// Only the lower triangle of A is read. Householder tridiagonalization runs in
// Eigen and the tridiagonal problem in LAPACK's MRRR solver, so no level-3
// BLAS kernel is involved.
void top_eigenpairs(Eigen::MatrixXd A, int count, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = A.rows();
  if (n == 1) {
    values = A.diagonal();
    vectors = Eigen::MatrixXd::Ones(1, 1);
    return;
  }
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(A);
  Eigen::MatrixXd Z;
  tridiagonal_top(tri.diagonal(), tri.subDiagonal(), count, values, Z);
  vectors = tri.matrixQ() * Z;
  if (!values.allFinite() || !vectors.allFinite()) throw NumericalError("symmetric eigensolver produced non-finite output");
}

}  // namespace

void canonicalize_signs(Eigen::MatrixXd& xi) {
  for (Eigen::Index j = 0; j < xi.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < xi.rows(); ++i) {
      const double a = std::abs(xi(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (xi(best, j) < 0.0) xi.col(j) = -xi.col(j);
  }
}

SampleSpectrum sym_eig(const Eigen::MatrixXd& Q, int N, const Tolerances& tol) {
  check_symmetric(Q, tol);
  if (N < 1) throw ConfigError("sample size must be positive");
  SampleSpectrum s;
  s.M = static_cast<int>(Q.rows());
  s.N = N;
  top_eigenpairs(Q, static_cast<int>(Q.rows()), s.mu, s.xi);
  canonicalize_signs(s.xi);
  return s;
}

SampleSpectrum sym_eig_top(const Eigen::MatrixXd& Q, int N, int k, const Tolerances& tol) {
  check_symmetric(Q, tol);
  const int n = static_cast<int>(Q.rows());
  if (k < 1 || k > n) throw ConfigError("requested number of eigenpairs is out of range");
  if (N < 1) throw ConfigError("sample size must be positive");
  SampleSpectrum s;
  s.M = n;
  s.N = N;
  top_eigenpairs(Q, k, s.mu, s.xi);
  canonicalize_signs(s.xi);
  return s;
}

SampleSpectrum spectrum_from_data(const Eigen::MatrixXd& Y, int k) {
  const int M = static_cast<int>(Y.rows());
  const int N = static_cast<int>(Y.cols());
  if (k < 1 || k > std::min(M, N)) throw ConfigError("requested number of eigenpairs is out of range");
  SampleSpectrum s;
  s.M = M;
  s.N = N;
  if (M <= N) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(M, M);
    Q.selfadjointView<Eigen::Lower>().rankUpdate(Y);
    top_eigenpairs(std::move(Q), k, s.mu, s.xi);
  } else {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
    G.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose());
    Eigen::MatrixXd W;
    top_eigenpairs(std::move(G), k, s.mu, W);
    s.xi = Y * W;
    for (int j = 0; j < k; ++j) {
      const double nrm = s.xi.col(j).norm();
      if (!(nrm > 0.0)) throw NumericalError("zero singular value among the requested eigenpairs");
      s.xi.col(j) /= nrm;
    }
  }
  canonicalize_signs(s.xi);
  return s;
}

void tridiagonal_top(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, int k, Eigen::VectorXd& values,
                     Eigen::MatrixXd& vectors) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  if (offdiag.size() + 1 != n) throw ConfigError("tridiagonal: off-diagonal must have n-1 entries");
  if (k < 1 || k > n) throw ConfigError("requested number of eigenpairs is out of range");
  Eigen::VectorXd d = diag;
  Eigen::VectorXd e(n);
  e.head(n - 1) = offdiag;
  e(n - 1) = 0.0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd Z(n, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
  lapack_int m = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, n - k + 1, n,
                                         0.0, &m, w.data(), Z.data(), n, isuppz.data());
  if (info != 0 || m != k) throw NumericalError("tridiagonal eigensolver failed");
  values.resize(k);
  vectors.resize(n, k);
  for (int j = 0; j < k; ++j) {
    values(j) = w(k - 1 - j);
    vectors.col(j) = Z.col(k - 1 - j);
  }
}

double generalized_component(const SampleSpectrum& spec, const std::vector<int>& I, const Eigen::VectorXd& w,
                             const Tolerances& tol) {
  if (w.size() != spec.M) throw ConfigError("probe vector has the wrong length");
  if (std::abs(w.norm() - 1.0) > tol.unit_norm) throw ConfigError("probe vector is not a unit vector");
  double acc = 0.0;
  for (int t : I) {
    if (t < 0 || t >= spec.size()) throw ConfigError("eigenvector index out of range");
    const double c = spec.xi.col(t).dot(w);
    acc += c * c;
  }
  return acc;
}

SpikePartition::SpikePartition(std::vector<std::vector<int>> groups) : groups_(std::move(groups)) {
  int next = 0;
  for (const auto& g : groups_) {
    if (g.empty()) throw ConfigError("partition groups must be non-empty");
    for (int idx : g) {
      if (idx != next) throw ConfigError("partition groups must cover consecutive indices starting at the first spike");
      owner_.push_back(static_cast<int>(&g - groups_.data()));
      ++next;
    }
  }
  n_ = next;
}

SpikePartition SpikePartition::singletons(int R) {
  std::vector<std::vector<int>> g;
  for (int i = 0; i < R; ++i) g.push_back({i});
  return SpikePartition(std::move(g));
}

SpikePartition SpikePartition::from_sizes(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> g;
  int next = 0;
  for (int s : sizes) {
    if (s < 1) throw ConfigError("group sizes must be positive");
    std::vector<int> grp;
    for (int k = 0; k < s; ++k) grp.push_back(next++);
    g.push_back(std::move(grp));
  }
  return SpikePartition(std::move(g));
}

bool SpikePartition::is_union_of_groups(const std::vector<int>& I) const {
  std::vector<int> count(groups_.size(), 0);
  for (int i : I) {
    if (i < 0 || i >= n_) return false;
    ++count[owner_[i]];
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (count[g] != 0 && count[g] != static_cast<int>(groups_[g].size())) return false;
  }
  return true;
}

SpikeEstimates estimate_spikes(const SampleSpectrum& spec, const SpikePartition& partition, const Tolerances& tol) {
  if (partition.num_indices() > spec.size()) {
    throw ConfigError("partition refers to more eigenvalues than were computed");
  }
  SpikeEstimates est;
  est.per_index.resize(partition.num_indices());
  for (const auto& g : partition.groups()) {
    double mean = 0.0;
    for (int t : g) mean += spec.mu(t);
    mean /= static_cast<double>(g.size());
    const double d = gamma_shrink(mean, spec.y(), tol);
    est.per_group.push_back(d);
    for (int t : g) est.per_index[t] = d;
  }
  return est;
}

SpikePartition auto_partition(const SampleSpectrum& spec, int r_star, const Tolerances& tol) {
  if (r_star < 1 || r_star > spec.size()) throw ConfigError("r_star is out of range");
  const double y = spec.y();
  const double N = spec.N;
  std::vector<double> g(r_star);
  for (int t = 0; t < r_star; ++t) g[t] = gamma_shrink(spec.mu(t), y, tol);
  std::vector<int> sizes{1};
  for (int t = 0; t + 1 < r_star; ++t) {
    const double scale = tol.gap_factor * std::sqrt(g[t]) / std::sqrt(g[t] - std::sqrt(y)) / std::sqrt(N) *
                         std::pow(N, tol.delta_gap);
    if (g[t] - g[t + 1] < scale) {
      ++sizes.back();
    } else {
      sizes.push_back(1);
    }
  }
  return SpikePartition::from_sizes(sizes);
}

bool extra_spike_warning(const SampleSpectrum& spec, int r, const Tolerances& tol) {
  if (r < 0 || r >= spec.size()) return false;
  const double lp = spectral_edges(spec.y()).upper;
  return spec.mu(r) > lp + std::pow(static_cast<double>(spec.N), -2.0 / 3.0 + tol.warn_exponent);
}

void write_spectrum_csv(std::ostream& os, const SampleSpectrum& spec) {
  os << "index,mu";
  for (int i = 0; i < spec.M; ++i) os << ",xi_" << (i + 1);
  os << '\n';
  for (int t = 0; t < spec.size(); ++t) {
    os << (t + 1) << ',' << fmt17(spec.mu(t));
    for (int i = 0; i < spec.M; ++i) os << ',' << fmt17(spec.xi(i, t));
    os << '\n';
  }
}

}  // namespace spikelab
