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

#include "spikelab/mp_law.hpp"

#include <cmath>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

void check_supercritical(double d, double y, const Tolerances& tol) {
  check_aspect_ratio(y);
  if (!std::isfinite(d) || d - std::sqrt(y) <= edge_guard(y, tol)) {
    std::ostringstream os;
    os << "spike d=" << d << " is not above the critical value sqrt(y)=" << std::sqrt(y);
    throw SubcriticalError(os.str());
  }
}

// sqrt(z - lambda_plus) * sqrt(z - lambda_minus) with principal roots. This is
// analytic off the support, behaves like z at infinity and has positive
// imaginary part on the upper half plane.
std::complex<double> edge_root(std::complex<double> z, double y) {
  check_aspect_ratio(y);
  const SpectralEdges e = spectral_edges(y);
  if (z.imag() == 0.0 && z.real() >= e.lower && z.real() <= e.upper) {
    throw ConfigError("Stieltjes transform evaluated on the support of the MP law");
  }
  if (z == std::complex<double>(0.0, 0.0)) {
    throw ConfigError("Stieltjes transform evaluated at z = 0");
  }
  return std::sqrt(z - e.upper) * std::sqrt(z - e.lower);
}

}  // namespace

void check_aspect_ratio(double y) {
  if (!std::isfinite(y) || y <= 0.0) {
    throw ConfigError("aspect ratio y must be finite and positive");
  }
}

SpectralEdges spectral_edges(double y) {
  check_aspect_ratio(y);
  const double s = std::sqrt(y);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

double edge_guard(double y, const Tolerances& tol) {
  return tol.edge_guard_rel * spectral_edges(y).upper;
}

double theta(double d, double y, const Tolerances& tol) {
  check_supercritical(d, y, tol);
  return 1.0 + d + y + y / d;
}

double theta_prime(double d, double y, const Tolerances& tol) {
  check_supercritical(d, y, tol);
  return 1.0 - y / (d * d);
}

double gamma_shrink(double x, double y, const Tolerances& tol) {
  check_aspect_ratio(y);
  const double lp = spectral_edges(y).upper;
  if (!std::isfinite(x) || x - lp <= edge_guard(y, tol)) {
    std::ostringstream os;
    os << "eigenvalue " << x << " is not separated from the bulk edge " << lp;
    throw SubcriticalError(os.str());
  }
  const double b = x - y - 1.0;
  const double disc = b * b - 4.0 * y;
  if (disc < 0.0) {
    throw NumericalError("negative discriminant above the bulk edge");
  }
  return 0.5 * b + 0.5 * std::sqrt(disc);
}

double vartheta(double d, double y, const Tolerances& tol) {
  check_supercritical(d, y, tol);
  return (d * d - y) / (d * (d + y));
}

double vartheta_prime(double d, double y, const Tolerances& tol) {
  check_supercritical(d, y, tol);
  const double dy = d + y;
  return y * (d * d + 2.0 * d + y) / (d * d * dy * dy);
}

AuxFunctions aux_funcs(double d, double y, const Tolerances& tol) {
  check_supercritical(d, y, tol);
  const double dy = d + y;
  AuxFunctions a{};
  a.f = y * (1.0 + d) / (d * dy) * (1.0 + d * (1.0 + d) / dy);
  a.g = 2.0 * std::sqrt((d + 1.0) * (d + std::sqrt(y))) / dy;
  a.h = (d + 1.0) / dy;
  a.l = (1.0 + d) / std::sqrt(d * dy);
  return a;
}

std::complex<double> stieltjes_m1(std::complex<double> z, double y) {
  const auto s = edge_root(z, y);
  return (1.0 - y - z + s) / (2.0 * z * y);
}

std::complex<double> stieltjes_m2(std::complex<double> z, double y) {
  const auto s = edge_root(z, y);
  return (y - 1.0 - z + s) / (2.0 * z);
}

std::complex<double> stieltjes_m1_prime(std::complex<double> z, double y) {
  const auto m = stieltjes_m1(z, y);
  return -(y * m * m + m) / (2.0 * z * y * m + z - 1.0 + y);
}

std::complex<double> stieltjes_m2_prime(std::complex<double> z, double y) {
  const auto m = stieltjes_m2(z, y);
  return -(m * m + m) / (2.0 * z * m + z + 1.0 - y);
}

}  // namespace spikelab
