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

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "spikelab/errors.hpp"
#include "spikelab/mp_law.hpp"

using namespace spikelab;
using cd = std::complex<double>;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

const double kYs[] = {0.1, 0.5, 1.0, 2.0, 10.0};

}  // namespace

TEST_CASE("spectral edges") {
  auto e = spectral_edges(1.0);
  CHECK(e.lower == 0.0);
  CHECK(e.upper == 4.0);
  e = spectral_edges(0.1);
  CHECK(e.lower == doctest::Approx(0.4675444679663241336).epsilon(1e-15));
  CHECK(e.upper == doctest::Approx(1.7324555320336758664).epsilon(1e-15));
  e = spectral_edges(4.0);
  CHECK(e.lower == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.upper == doctest::Approx(9.0).epsilon(1e-15));
  CHECK_THROWS_AS(spectral_edges(0.0), ConfigError);
  CHECK_THROWS_AS(spectral_edges(-1.0), ConfigError);
  CHECK_THROWS_AS(spectral_edges(NAN), ConfigError);
  CHECK_THROWS_AS(spectral_edges(INFINITY), ConfigError);
}

TEST_CASE("theta and its inverse") {
  CHECK(theta(2.0, 0.1) == doctest::Approx(3.15).epsilon(1e-15));
  CHECK(theta(5.0, 1.0) == doctest::Approx(7.2).epsilon(1e-15));
  CHECK(gamma_shrink(7.2, 1.0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(std::abs(gamma_shrink(theta(3.0, 0.5), 0.5) - 3.0) < 1e-12);
  // Boundary limits approached from the supercritical side.
  CHECK(theta(1.0 + 1e-6, 1.0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(gamma_shrink(4.0 + 1e-8, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(theta(1.0, 1.0), SubcriticalError);
  CHECK_THROWS_AS(theta(0.5, 1.0), SubcriticalError);
  CHECK_THROWS_AS(gamma_shrink(4.0, 1.0), SubcriticalError);
  CHECK_THROWS_AS(gamma_shrink(3.0, 1.0), SubcriticalError);
}

TEST_CASE("inverse pair on log grids") {
  for (double y : kYs) {
    for (double d : log_grid(std::sqrt(y) * 1.001, 1e6, 200)) {
      const double back = gamma_shrink(theta(d, y), y);
      CHECK(std::abs(back - d) <= 1e-10 * std::max(1.0, d));
    }
  }
}

TEST_CASE("monotonicity of theta and vartheta") {
  for (double y : kYs) {
    const auto g = log_grid(std::sqrt(y) * 1.001, 1e6, 400);
    for (std::size_t i = 1; i < g.size(); ++i) {
      CHECK(theta(g[i], y) - theta(g[i - 1], y) > 0.0);
      CHECK(vartheta(g[i], y) - vartheta(g[i - 1], y) > 0.0);
    }
  }
}

TEST_CASE("vartheta values") {
  CHECK(vartheta(2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(vartheta(1e6, 1.0) - 1.0) < 3e-6);
  CHECK(vartheta(1.0 + 1e-7, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_THROWS_AS(vartheta(1.0, 1.0), SubcriticalError);
  // Closed-form derivatives against central differences.
  for (double y : kYs) {
    const double d = 3.0 * std::sqrt(y) + 0.5;
    const double eps = 1e-6 * d;
    CHECK(vartheta_prime(d, y) ==
          doctest::Approx((vartheta(d + eps, y) - vartheta(d - eps, y)) / (2 * eps)).epsilon(1e-7));
    CHECK(theta_prime(d, y) == doctest::Approx((theta(d + eps, y) - theta(d - eps, y)) / (2 * eps)).epsilon(1e-7));
  }
}

TEST_CASE("auxiliary functions") {
  for (double d : {0.5, 1.0, 3.0, 100.0}) CHECK(aux_funcs(d + 1.0, 1.0).h == doctest::Approx(1.0).epsilon(1e-15));
  // At the critical point d = sqrt(y) = 1 the map l equals sqrt(2); approach from above.
  CHECK(aux_funcs(1.0 + 1e-6, 1.0).l == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  const auto a = aux_funcs(2.0, 0.1);
  CHECK(a.f == doctest::Approx(0.27551020408163265306).epsilon(1e-14));
  CHECK(a.g == doctest::Approx(2.510510025433262345).epsilon(1e-14));
  CHECK(a.h == doctest::Approx(1.4285714285714285714).epsilon(1e-14));
  CHECK(a.l == doctest::Approx(1.463850109422799769).epsilon(1e-14));
  for (double y : kYs) {
    for (double d : log_grid(std::sqrt(y) * 1.001, 1e6, 50)) {
      const auto x = aux_funcs(d, y);
      CHECK(x.f > 0.0);
      CHECK(x.g > 0.0);
      CHECK(x.h > 0.0);
      CHECK(x.l > 0.0);
    }
  }
  CHECK_THROWS_AS(aux_funcs(0.3, 0.1), SubcriticalError);
}

TEST_CASE("Stieltjes transforms on the real axis") {
  for (double y : {0.1, 1.0, 10.0}) {
    const double z = spectral_edges(y).upper + 1.0;
    const cd m1 = stieltjes_m1(z, y);
    const cd m2 = stieltjes_m2(z, y);
    CHECK(std::abs(m1.imag()) < 1e-15);
    CHECK(std::abs(z * y * m1 * m1 + (z - (1.0 - y)) * m1 + 1.0) < 1e-12);
    CHECK(std::abs(z * m2 * m2 + (z + 1.0 - y) * m2 + 1.0) < 1e-12);
    CHECK(std::abs(m1 + 1.0 / (z * (1.0 + m2))) < 1e-12);
  }
  const double y = 0.5;
  CHECK(std::abs(stieltjes_m1(1e8, y) * 1e8 + 1.0) < 1e-6);
  CHECK_THROWS_AS(stieltjes_m1(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(stieltjes_m2(cd(0.0, 0.0), 0.5), ConfigError);
}

TEST_CASE("Stieltjes quadratics and positivity off the support") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> re(-5.0, 15.0), im(-3.0, 3.0);
  for (double y : kYs) {
    for (int k = 0; k < 100; ++k) {
      cd z(re(gen), im(gen));
      if (std::abs(z.imag()) < 1e-3) z.imag(1e-3);
      const cd m1 = stieltjes_m1(z, y);
      const cd m2 = stieltjes_m2(z, y);
      CHECK(std::abs(z * y * m1 * m1 + (z - (1.0 - y)) * m1 + 1.0) < 1e-10);
      CHECK(std::abs(z * m2 * m2 + (z + 1.0 - y) * m2 + 1.0) < 1e-10);
      if (z.imag() > 0) {
        CHECK(m1.imag() > 0.0);
        CHECK(m2.imag() > 0.0);
      }
    }
  }
}

TEST_CASE("identities between m1 and m2 with closed-form derivatives") {
  for (double y : kYs) {
    for (double shift : {0.01, 0.5, 1.0, 10.0}) {
      const double z = spectral_edges(y).upper + shift;
      const cd m1 = stieltjes_m1(z, y), m2 = stieltjes_m2(z, y);
      const cd d1 = stieltjes_m1_prime(z, y), d2 = stieltjes_m2_prime(z, y);
      CHECK(std::abs(m1 + 1.0 / (z * (1.0 + m2))) < 1e-10);
      CHECK(std::abs(m2 + 1.0 / (z * (1.0 + y * m1))) < 1e-10);
      CHECK(std::abs(y * m1 - m2 - (1.0 - y) / z) < 1e-10);
      // Derivative of the last identity.
      CHECK(std::abs(y * d1 - d2 + (1.0 - y) / (z * z)) < 1e-10);
      const double h = 1e-6 * z;
      CHECK(std::abs(d1 - (stieltjes_m1(z + h, y) - stieltjes_m1(z - h, y)) / (2 * h)) < 1e-5 * std::abs(d1) + 1e-8);
    }
  }
}
