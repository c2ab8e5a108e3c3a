// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/sim/random.h"

#include <cmath>
#include <numbers>

#include "rollsim/common/error.h"

namespace rollsim::sim {

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(uint64_t root_seed, std::string label)
    : root_seed_(root_seed),
      label_(std::move(label)),
      engine_(Mix64(Mix64(root_seed) ^ Fnv1a64(label_))) {}

double RandomStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::UniformOpen() {
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::Normal() {
  const double u1 = UniformOpen();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int64_t RandomStream::UniformInt(int64_t lo, int64_t hi) {
  if (hi < lo) throw InvalidArgument("UniformInt: empty range");
  const auto span = static_cast<uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<int64_t>(engine_());
  // Modulo bias is below span / 2^64, negligible for token and turn counts.
  return lo + static_cast<int64_t>(engine_() % span);
}

RandomStream RandomStream::Child(std::string_view suffix) const {
  std::string child = label_;
  child += '/';
  child += suffix;
  return RandomStream(root_seed_, std::move(child));
}

}  // namespace rollsim::sim
