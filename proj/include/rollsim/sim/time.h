// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>

namespace rollsim::sim {

/// Virtual seconds. Every latency in the simulator is expressed in this unit.
using SimTime = double;

inline constexpr SimTime kTimeInfinity = std::numeric_limits<double>::infinity();

inline bool IsValidDuration(SimTime t) { return std::isfinite(t) && t >= 0.0; }

}  // namespace rollsim::sim
