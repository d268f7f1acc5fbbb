// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace attndrop {

/// Counter-based pseudorandom stream.
///
/// Draw i of a stream with key `s` is splitmix64_mix(s + (i + 1) * 0x9E3779B97F4A7C15),
/// i.e. the SplitMix64 sequence addressed by an explicit counter. Only 64-bit
/// integer arithmetic is involved, so a (key, counter) pair yields the same
/// bits on every platform and compiler. Copying a stream snapshots it: the copy
/// replays exactly the draws the original would have made.
///
/// Not thread-safe; give each thread its own stream (see fork()).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : key_(seed) {}

  /// Independent child stream identified by `tag`; does not advance this one.
  RngStream fork(std::uint64_t tag) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// 1 with probability `prob_one`; exact for prob_one in {0, 1}.
  bool bernoulli(double prob_one) { return uniform() < prob_one; }
  /// Standard normal via Box-Muller (uses two draws).
  double normal();
  /// Uniform integer in [0, n), n > 0, by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace attndrop
