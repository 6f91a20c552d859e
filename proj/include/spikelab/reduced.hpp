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

// Exact-in-law fast sampler for Gaussian data with a single simple spike.
//
// Golub-Kahan bidiagonalization of the Gaussian matrix that starts from the
// spike direction leaves that direction fixed and turns X into a lower
// bidiagonal matrix with independent chi entries (Dumitriu-Edelman). The
// top-k eigenpairs of the resulting tridiagonal matrix have the same joint law
// as those of Q once the components orthogonal to the spike are rotated by an
// independent Haar frame. Cost is O(M k) per draw instead of O(M^2 N).

#pragma once

#include <Eigen/Dense>

#include "spikelab/model.hpp"
#include "spikelab/rng.hpp"
#include "spikelab/spectral.hpp"

namespace spikelab {

struct TridiagonalCovariance {
  Eigen::VectorXd diag;
  Eigen::VectorXd offdiag;
};

/// Tridiagonal matrix with the law of Q in coordinates whose first axis is the
/// spike direction. Its size is min(M, N+1); remaining eigenvalues are zero.
TridiagonalCovariance sample_reduced_covariance(int M, int N, double d, Stream& stream);

/// Top-k eigenpairs of Q for a Gaussian model with exactly one simple spike.
SampleSpectrum sample_reduced_spectrum(const SpikedModel& model, int k, Stream& stream);

/// Whether sample_reduced_spectrum applies to the model.
bool reduced_sampler_applies(const SpikedModel& model);

}  // namespace spikelab
