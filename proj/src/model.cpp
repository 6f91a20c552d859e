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

#include "spikelab/model.hpp"

#include <cmath>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

EntryLaw EntryLaw::gaussian() { return EntryLaw{}; }

EntryLaw EntryLaw::two_point(double value_hi, double value_lo, double prob_hi) {
  if (!(prob_hi > 0.0 && prob_hi < 1.0) || !std::isfinite(value_hi) || !std::isfinite(value_lo)) {
    throw ConfigError("two-point law needs finite values and prob_hi in (0,1)");
  }
  const double mean = prob_hi * value_hi + (1.0 - prob_hi) * value_lo;
  const double var = prob_hi * value_hi * value_hi + (1.0 - prob_hi) * value_lo * value_lo;
  if (std::abs(mean) > 1e-12 || std::abs(var - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "two-point law is not standardized (mean " << mean << ", variance " << var << ")";
    throw ConfigError(os.str());
  }
  EntryLaw law;
  law.kind_ = LawKind::kTwoPoint;
  law.hi_ = value_hi;
  law.lo_ = value_lo;
  law.p_ = prob_hi;
  return law;
}

EntryLaw EntryLaw::standardized_two_point(double prob_hi) {
  if (!(prob_hi > 0.0 && prob_hi < 1.0)) {
    throw ConfigError("prob_hi must lie in (0,1)");
  }
  const double q = 1.0 - prob_hi;
  return two_point(std::sqrt(q / prob_hi), -std::sqrt(prob_hi / q), prob_hi);
}

double EntryLaw::draw(Stream& s) const {
  if (kind_ == LawKind::kGaussian) return s.normal();
  return s.uniform() < p_ ? hi_ : lo_;
}

Cumulants cumulants(const EntryLaw& law) {
  if (law.kind() == LawKind::kGaussian) return {0.0, 0.0};
  // A standardized two-point law is fixed by p; using the closed forms in p
  // keeps the rational cases exact.
  const double p = law.prob_hi();
  const double q = 1.0 - p;
  return {(q - p) / std::sqrt(p * q), 1.0 / (p * q) - 6.0};
}

int dimension_for(int N, double y) {
  if (N < 1 || !(y > 0.0) || !std::isfinite(y)) {
    throw ConfigError("need N >= 1 and y > 0");
  }
  const long M = std::lround(y * N);
  if (M < 1) throw ConfigError("y * N rounds to zero rows");
  return static_cast<int>(M);
}

void check_orthonormal_columns(const Eigen::MatrixXd& V, double tol, const std::string& what) {
  if (V.cols() == 0) return;
  const Eigen::MatrixXd G = V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols());
  const double err = G.cwiseAbs().maxCoeff();
  if (!(err <= tol)) {
    std::ostringstream os;
    os << what << " columns are not orthonormal (max deviation " << err << ")";
    throw ConfigError(os.str());
  }
}

SpikedModel::SpikedModel(int M, int N, std::vector<Spike> spikes, Eigen::MatrixXd directions, EntryLaw law)
    : M_(M), N_(N), spikes_(std::move(spikes)), V_(std::move(directions)), law_(law) {
  if (M_ < 1 || N_ < 1) throw ConfigError("M and N must be positive");
  double prev = INFINITY;
  for (const Spike& s : spikes_) {
    if (!(s.d > 0.0) || !std::isfinite(s.d)) throw ConfigError("spike strengths must be finite and positive");
    if (s.multiplicity < 1) throw ConfigError("spike multiplicity must be positive");
    if (s.d >= prev) throw ConfigError("spikes must be listed in strictly decreasing order of d");
    prev = s.d;
    for (int k = 0; k < s.multiplicity; ++k) d_.push_back(s.d);
  }
  const int r = rank();
  if (r > 32) throw ConfigError("at most 32 spikes are supported");
  if (r > std::min(M_, N_)) throw ConfigError("number of spikes exceeds min(M, N)");
  if (V_.rows() != M_ || V_.cols() != r) {
    std::ostringstream os;
    os << "directions must be " << M_ << " x " << r << ", got " << V_.rows() << " x " << V_.cols();
    throw ConfigError(os.str());
  }
  check_orthonormal_columns(V_, 1e-10, "spike direction");
}

SpikedModel SpikedModel::standard_basis(int M, int N, std::vector<Spike> spikes, EntryLaw law) {
  int r = 0;
  for (const Spike& s : spikes) r += s.multiplicity;
  if (r > M) throw ConfigError("number of spikes exceeds M");
  return SpikedModel(M, N, std::move(spikes), Eigen::MatrixXd::Identity(M, r), law);
}

SpikedModel SpikedModel::with_directions(Eigen::MatrixXd directions) const {
  return SpikedModel(M_, N_, spikes_, std::move(directions), law_);
}

Eigen::MatrixXd SpikedModel::apply_sqrt_covariance(const Eigen::MatrixXd& X) const {
  if (X.rows() != M_) throw ConfigError("data matrix has the wrong number of rows");
  Eigen::MatrixXd Y = X;
  if (rank() == 0) return Y;
  Eigen::VectorXd scale(rank());
  for (int i = 0; i < rank(); ++i) scale(i) = std::sqrt(1.0 + d_[i]) - 1.0;
  Y.noalias() += V_ * (scale.asDiagonal() * (V_.transpose() * X));
  return Y;
}

Eigen::MatrixXd SpikedModel::population_covariance() const {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(M_, M_);
  for (int i = 0; i < rank(); ++i) S.noalias() += d_[i] * V_.col(i) * V_.col(i).transpose();
  return S;
}

Eigen::MatrixXd SpikedModel::sqrt_covariance() const {
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(M_, M_);
  for (int i = 0; i < rank(); ++i) {
    T.noalias() += (std::sqrt(1.0 + d_[i]) - 1.0) * V_.col(i) * V_.col(i).transpose();
  }
  return T;
}

Eigen::MatrixXd sample_data(const SpikedModel& model, Stream& stream) {
  const int M = model.M();
  const int N = model.N();
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::MatrixXd X(M, N);
  const EntryLaw& law = model.law();
  double* p = X.data();
  for (Eigen::Index k = 0; k < X.size(); ++k) p[k] = law.draw(stream) * scale;
  return X;
}

Eigen::MatrixXd sample_covariance(const SpikedModel& model, const Eigen::MatrixXd& X) {
  if (X.rows() != model.M()) throw ConfigError("data matrix has the wrong number of rows");
  const Eigen::MatrixXd Y = model.apply_sqrt_covariance(X);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(Y.rows(), Y.rows());
  Q.selfadjointView<Eigen::Lower>().rankUpdate(Y);
  Q.triangularView<Eigen::StrictlyUpper>() = Q.transpose();
  return Q;
}

}  // namespace spikelab
