// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace rollsim::workload {

inline constexpr double kDefaultMfu = 0.4;
inline constexpr double kDefaultMbu = 0.6;

/// Per-device compute and bandwidth parameters. `tflops` is in TFLOP/s,
/// bandwidths are bytes/s, `mfu`/`mbu` scale peak to achieved rates.
struct HardwareProfile {
  std::string name;
  double tflops = 0.0;
  double hbm_bytes = 0.0;
  double hbm_bw = 0.0;
  double nvlink_bw = 0.0;
  double cost_unit = 1.0;
  double mfu = kDefaultMfu;
  double mbu = kDefaultMbu;

  /// Throws InvalidArgument unless every field is positive and mfu, mbu <= 1.
  void Validate() const;

  /// Achieved FLOP/s: tflops * 1e12 * mfu.
  double EffectiveFlops() const { return tflops * 1e12 * mfu; }
  /// Achieved HBM bytes/s: hbm_bw * mbu.
  double EffectiveHbmBandwidth() const { return hbm_bw * mbu; }

  /// Aggregate profile of `devices` identical devices acting as one worker
  /// (compute, memory and bandwidth add up; NVLink stays per-link).
  HardwareProfile Scaled(int devices) const;
  HardwareProfile WithEfficiency(double mfu, double mbu) const;
};

/// Compute-optimized profile (989.5 TFLOPS, 80 GB, 3.35 TB/s, 400 GB/s NVLink).
HardwareProfile H800();
/// Bandwidth-optimized profile (148 TFLOPS, 96 GB, 4 TB/s, 900 GB/s NVLink).
HardwareProfile H20();
/// Built-in profile by name, if any.
std::optional<HardwareProfile> BuiltinHardware(const std::string &name);

}  // namespace rollsim::workload
