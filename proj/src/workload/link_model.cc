// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/workload/link_model.h"

#include <algorithm>
#include <cmath>

#include "rollsim/common/error.h"

namespace rollsim::workload {

void LinkModel::Validate() const {
  if (!(fixed_overhead > 0.0) || !std::isfinite(fixed_overhead)) {
    throw InvalidArgument("link '" + name + "': fixed_overhead must be positive");
  }
  if (!(eff_bandwidth > 0.0) || !std::isfinite(eff_bandwidth)) {
    throw InvalidArgument("link '" + name + "': eff_bandwidth must be positive");
  }
}

LinkFit CalibrateLink(std::string name, std::span<const TransferSample> samples) {
  if (samples.size() < 2) {
    throw InvalidArgument("calibrate '" + name + "': need at least two samples");
  }
  // Center the data before solving the 2x2 normal equations.
  const double n = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto &s : samples) {
    mean_x += s.bytes;
    mean_y += s.seconds;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto &s : samples) {
    sxx += (s.bytes - mean_x) * (s.bytes - mean_x);
    sxy += (s.bytes - mean_x) * (s.seconds - mean_y);
  }
  if (sxx <= 1e-12 * std::max(1.0, mean_x * mean_x)) {
    throw InvalidArgument("calibrate '" + name + "': singular fit, all sample sizes are equal");
  }
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) {
    throw InvalidArgument("calibrate '" + name + "': fitted bandwidth is not positive");
  }
  LinkFit fit;
  fit.model.name = std::move(name);
  fit.model.eff_bandwidth = 1.0 / slope;
  fit.model.fixed_overhead = mean_y - slope * mean_x;
  for (const auto &s : samples) {
    const double predicted = fit.model.TransferTime(s.bytes);
    const double rel = (predicted - s.seconds) / s.seconds;
    fit.relative_residuals.push_back(rel);
    fit.max_abs_relative_residual = std::max(fit.max_abs_relative_residual, std::abs(rel));
  }
  return fit;
}

}  // namespace rollsim::workload
