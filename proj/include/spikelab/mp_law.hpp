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

// Marchenko-Pastur edges, Stieltjes transforms and the spike/outlier maps.

#pragma once

#include <complex>

#include "spikelab/tolerances.hpp"

namespace spikelab {

struct SpectralEdges {
  double lower;  // (1 - sqrt(y))^2
  double upper;  // (1 + sqrt(y))^2
};

/// Throws ConfigError unless y is finite and positive.
void check_aspect_ratio(double y);

SpectralEdges spectral_edges(double y);

/// Absolute edge guard for aspect ratio y.
double edge_guard(double y, const Tolerances& tol = {});

/// Location of the outlier generated by spike d: 1 + d + y + y/d.
double theta(double d, double y, const Tolerances& tol = {});
double theta_prime(double d, double y, const Tolerances& tol = {});

/// Inverse of theta on (sqrt(y), inf).
double gamma_shrink(double x, double y, const Tolerances& tol = {});

/// First-order limit of |<v, xi>|^2: (d^2 - y) / (d (d + y)).
double vartheta(double d, double y, const Tolerances& tol = {});
double vartheta_prime(double d, double y, const Tolerances& tol = {});

struct AuxFunctions {
  double f;
  double g;
  double h;
  double l;
};

AuxFunctions aux_funcs(double d, double y, const Tolerances& tol = {});

/// Stieltjes transform of the MP law of X^T X type (m1) and X X^T type (m2).
/// Defined off the real support [lambda_minus, lambda_plus] and away from 0.
std::complex<double> stieltjes_m1(std::complex<double> z, double y);
std::complex<double> stieltjes_m2(std::complex<double> z, double y);

/// Closed-form z-derivatives obtained by differentiating the defining
/// quadratics.
std::complex<double> stieltjes_m1_prime(std::complex<double> z, double y);
std::complex<double> stieltjes_m2_prime(std::complex<double> z, double y);

}  // namespace spikelab
