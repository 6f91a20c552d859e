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
#include <set>
#include <vector>

#include "doctest.h"
#include "spikelab/errors.hpp"
#include "spikelab/rng.hpp"

using namespace spikelab;

TEST_CASE("Philox4x64-10 known answers") {
  // Reference values from numpy.random.Philox.
  auto out = Philox4x64::generate({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x16554d9eca36314cULL);
  CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
  CHECK(out[2] == 0xd7e772cee186176bULL);
  CHECK(out[3] == 0x7e68b68aec7ba23bULL);

  out = Philox4x64::generate({1, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x02f4ba6408e4d89bULL);
  CHECK(out[3] == 0x907d7a052fd5b4dcULL);

  out = Philox4x64::generate({6, 0, 9, 1}, {0xffffffffffffffffULL, 0x8000000000000000ULL});
  CHECK(out[0] == 0x91e68751d74c415fULL);
  CHECK(out[1] == 0xb70e8edf38bb57b9ULL);
  CHECK(out[2] == 0xc9e47416be8f129eULL);
  CHECK(out[3] == 0x85ed0ad804aa3759ULL);
}

TEST_CASE("stream layout matches the counter convention") {
  Stream s(20260101, 3, Lane::kReduced);
  const std::uint64_t expect[8] = {0xff289fbfc09c78deULL, 0xefe8bbee239bca49ULL, 0x9ce6c9e031bce2ebULL,
                                   0x4e93bba565d03f59ULL, 0x9e0825943bf68388ULL, 0xa9f42a1e3e6e777eULL,
                                   0xc142b9f1b61578edULL, 0xdcc4163929dbcdc1ULL};
  for (auto e : expect) CHECK(s.next_u64() == e);
}

TEST_CASE("streams are reproducible and lanes are disjoint") {
  Stream a(1, 2), b(1, 2);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  std::set<std::uint64_t> seen;
  for (auto lane : {Lane::kData, Lane::kMixture, Lane::kReduced, Lane::kDirection, Lane::kUser}) {
    Stream s(1, 2, lane);
    for (int i = 0; i < 64; ++i) seen.insert(s.next_u64());
  }
  CHECK(seen.size() == 5 * 64);
  Stream c(1, 3);
  Stream d(2, 2);
  Stream e(1, 2);
  const auto x = e.next_u64();
  CHECK(c.next_u64() != x);
  CHECK(d.next_u64() != x);
  CHECK(Stream(1, 2).with_lane(Lane::kMixture).next_u64() == Stream(1, 2, Lane::kMixture).next_u64());
}

TEST_CASE("distribution moments") {
  Stream s(99, 0, Lane::kUser);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    su += u;
    su2 += u * u;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    const double z = s.normal();
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3) < 0.005);
  CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 5 * std::sqrt(96.0 / n));

  for (double shape : {0.3, 1.0, 2.5, 40.0}) {
    double m = 0, m2 = 0;
    const int k = 100000;
    for (int i = 0; i < k; ++i) {
      const double g = s.gamma(shape);
      CHECK(g > 0.0);
      m += g;
      m2 += g * g;
    }
    m /= k;
    const double var = m2 / k - m * m;
    CHECK(std::abs(m - shape) < 5 * std::sqrt(shape / k));
    CHECK(std::abs(var - shape) < 0.05 * shape + 0.02);
  }
  double c2 = 0;
  for (int i = 0; i < 50000; ++i) {
    const double c = s.chi(7.0);
    c2 += c * c;
  }
  CHECK(std::abs(c2 / 50000 - 7.0) < 5 * std::sqrt(14.0 / 50000));
  CHECK_THROWS_AS(s.gamma(0.0), ConfigError);
}
