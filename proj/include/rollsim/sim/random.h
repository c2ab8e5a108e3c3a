// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace rollsim::sim {

/// 64-bit FNV-1a over a byte string.
uint64_t Fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

/// SplitMix64 finalizer; a bijective mixing function on 64-bit words.
uint64_t Mix64(uint64_t x);

/// A named pseudo-random stream. Two streams with the same (root_seed, label)
/// produce identical sequences on every platform; streams with different
/// labels are independent, so adding a consumer never shifts another one.
///
/// Only std::mt19937_64 (whose output sequence is fixed by the standard) and
/// hand-written transforms are used, never the implementation-defined
/// std::*_distribution adaptors.
class RandomStream {
 public:
  RandomStream(uint64_t root_seed, std::string label);

  uint64_t root_seed() const { return root_seed_; }
  const std::string &label() const { return label_; }

  uint64_t NextU64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double Uniform();
  /// Uniform in (0, 1]; safe to feed to log().
  double UniformOpen();
  /// Standard normal draw (Box-Muller, always consumes two words).
  double Normal();
  /// Uniform integer in [lo, hi], inclusive. Consumes one word.
  int64_t UniformInt(int64_t lo, int64_t hi);

  /// Derives an independent child stream, equivalent to
  /// RandomStream(root_seed, label + "/" + suffix).
  RandomStream Child(std::string_view suffix) const;

 private:
  uint64_t root_seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

}  // namespace rollsim::sim
