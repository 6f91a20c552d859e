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

// Counter-based random streams. A stream is addressed by (seed, stream id,
// lane); the n-th output of a stream is a pure function of that address and n,
// so replications can be generated in any order on any number of threads.

#pragma once

#include <array>
#include <cstdint>

namespace spikelab {

/// Philox4x64 with 10 rounds (Salmon et al., SC'11).
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;
  static Counter generate(Counter ctr, Key key);
};

/// Purpose tags for the lane field; distinct lanes never overlap.
enum class Lane : std::uint64_t {
  kData = 0,
  kMixture = 1,
  kReduced = 2,
  kDirection = 3,
  kUser = 16,
};

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id, Lane lane = Lane::kData);
  Stream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t lane);

  /// A sibling stream with the same key and a different lane.
  Stream with_lane(Lane lane) const { return Stream(key_[0], key_[1], static_cast<std::uint64_t>(lane)); }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Box-Muller; pairs are consumed in order).
  double normal();
  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape);
  /// Chi distribution with dof degrees of freedom (square root of chi-square).
  double chi(double dof);

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }

 private:
  Philox4x64::Key key_;
  Philox4x64::Counter ctr_;
  Philox4x64::Counter buf_{};
  int pos_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace spikelab
