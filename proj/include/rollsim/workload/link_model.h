// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rollsim/sim/time.h"

namespace rollsim::workload {

/// Point-to-point transfer cost: fixed_overhead + bytes / eff_bandwidth.
struct LinkModel {
  std::string name;
  sim::SimTime fixed_overhead = 0.0;
  double eff_bandwidth = 0.0;  // bytes/s

  void Validate() const;
  sim::SimTime TransferTime(double bytes) const { return fixed_overhead + bytes / eff_bandwidth; }
};

struct TransferSample {
  double bytes;
  sim::SimTime seconds;
};

struct LinkFit {
  LinkModel model;
  /// (predicted - observed) / observed, one per input sample, in input order.
  std::vector<double> relative_residuals;
  double max_abs_relative_residual = 0.0;
};

/// Ordinary least-squares fit of seconds = overhead + bytes / bandwidth.
/// Throws InvalidArgument with fewer than two samples or when every sample
/// has the same size (singular system), or when the fitted slope is not
/// positive.
LinkFit CalibrateLink(std::string name, std::span<const TransferSample> samples);

}  // namespace rollsim::workload
