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

#include "spikelab/reduced.hpp"

#include <algorithm>
#include <cmath>

#include "spikelab/errors.hpp"

namespace spikelab {

TridiagonalCovariance sample_reduced_covariance(int M, int N, double d, Stream& stream) {
  if (M < 2 || N < 1) throw ConfigError("reduced sampler needs M >= 2 and N >= 1");
  const int n = std::min(M, N + 1);
  const int na = std::min(M, N);
  const int nb = std::min(M - 1, N);
  Eigen::VectorXd a(na), b(nb);
  for (int k = 0; k < na; ++k) a(k) = stream.chi(static_cast<double>(N - k));
  for (int k = 0; k < nb; ++k) b(k) = stream.chi(static_cast<double>(M - 1 - k));

  TridiagonalCovariance c;
  c.diag = Eigen::VectorXd::Zero(n);
  c.offdiag = Eigen::VectorXd::Zero(n - 1);
  for (int k = 0; k < n; ++k) {
    if (k < na) c.diag(k) += a(k) * a(k);
    if (k >= 1 && k - 1 < nb) c.diag(k) += b(k - 1) * b(k - 1);
    if (k + 1 < n && k < na && k < nb) c.offdiag(k) = a(k) * b(k);
  }
  const double s = std::sqrt(1.0 + d);
  c.diag(0) *= (1.0 + d);
  if (n > 1) c.offdiag(0) *= s;
  c.diag /= static_cast<double>(N);
  c.offdiag /= static_cast<double>(N);
  return c;
}

bool reduced_sampler_applies(const SpikedModel& model) {
  return model.law().kind() == LawKind::kGaussian && model.rank() == 1 && model.M() >= 2;
}

SampleSpectrum sample_reduced_spectrum(const SpikedModel& model, int k, Stream& stream) {
  if (!reduced_sampler_applies(model)) {
    throw ConfigError("reduced sampler requires Gaussian entries and exactly one simple spike");
  }
  const int M = model.M();
  const int N = model.N();
  const TridiagonalCovariance c = sample_reduced_covariance(M, N, model.d()[0], stream);
  const int n = static_cast<int>(c.diag.size());
  if (k < 1 || k > std::min(n - 1, std::min(M, N))) throw ConfigError("requested number of eigenpairs is out of range");

  Eigen::VectorXd values;
  Eigen::MatrixXd Z;
  tridiagonal_top(c.diag, c.offdiag, k, values, Z);

  // Tail coordinates (everything orthogonal to the spike) in their own
  // orthonormal basis: tail = B R.
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(M - 1, k);
  tail.topRows(n - 1) = Z.bottomRows(n - 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_tail(tail);
  Eigen::MatrixXd R = qr_tail.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  // Independent Haar k-frame in the orthogonal complement of v.
  const Eigen::VectorXd v = model.directions().col(0);
  Stream frame_stream = stream.with_lane(Lane::kDirection);
  Eigen::MatrixXd G(M, k);
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    for (Eigen::Index i = 0; i < G.rows(); ++i) G(i, j) = frame_stream.normal();
  }
  G -= v * (v.transpose() * G);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_g(G);
  Eigen::MatrixXd F = qr_g.householderQ() * Eigen::MatrixXd::Identity(M, k);
  for (int j = 0; j < k; ++j) {
    if (qr_g.matrixQR()(j, j) < 0.0) F.col(j) = -F.col(j);
  }
  // Re-project once: QR of the projected matrix may leave round-off along v.
  F -= v * (v.transpose() * F);

  SampleSpectrum s;
  s.M = M;
  s.N = N;
  s.mu = values;
  s.xi = v * Z.row(0) + F * R;
  for (int j = 0; j < k; ++j) s.xi.col(j).normalize();
  canonicalize_signs(s.xi);
  return s;
}

}  // namespace spikelab
