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

#pragma once

namespace spikelab {

/// Every numeric tolerance and tuning constant used by the library.
struct Tolerances {
  /// Edge guard, relative to lambda_plus: d - sqrt(y) and x - lambda_plus
  /// must exceed edge_guard_rel * lambda_plus.
  double edge_guard_rel = 1e-9;
  /// Relative asymmetry accepted by the eigensolver.
  double symmetry_rel = 1e-10;
  /// Column orthonormality of direction matrices.
  double direction_orthonormal = 1e-10;
  /// Column orthonormality of hypothesis bases.
  double basis_orthonormal = 1e-8;
  /// Unit-norm check for probe vectors.
  double unit_norm = 1e-8;
  /// Smallest eigenvalue accepted for a covariance, relative to its trace.
  double psd_rel = 1e-8;
  /// Symmetry of constructed covariances.
  double covariance_symmetry = 1e-12;
  /// Exponent in the separation diagnostics.
  double eps0 = 0.05;
  /// auto_partition gap rule.
  double gap_factor = 3.0;
  double delta_gap = 0.1;
  /// Extra-spike warning fires above lambda_plus + N^(-2/3 + warn_exponent).
  double warn_exponent = 0.1;
};

}  // namespace spikelab
