// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <vector>

#include "rollsim/sim/time.h"

namespace rollsim::metrics {

/// Busy intervals of one resource unit (a GPU, an engine, an instance).
/// A unit is busy while at least one modeled activity is resident on it.
class BusyTimeline {
 public:
  struct Span {
    sim::SimTime start;
    sim::SimTime end;
  };

  /// Spans must be added in non-decreasing start order; touching or
  /// overlapping spans are merged.
  void AddBusy(sim::SimTime start, sim::SimTime end) {
    if (!(end > start)) return;
    if (!spans_.empty() && start <= spans_.back().end) {
      spans_.back().end = std::max(spans_.back().end, end);
      return;
    }
    spans_.push_back({start, end});
  }

  /// Busy time intersected with [from, to).
  sim::SimTime BusyWithin(sim::SimTime from, sim::SimTime to) const {
    sim::SimTime total = 0.0;
    for (const auto &s : spans_) {
      const sim::SimTime lo = std::max(from, s.start);
      const sim::SimTime hi = std::min(to, s.end);
      if (hi > lo) total += hi - lo;
    }
    return total;
  }

  sim::SimTime TotalBusy() const {
    sim::SimTime total = 0.0;
    for (const auto &s : spans_) total += s.end - s.start;
    return total;
  }

  const std::vector<Span> &spans() const { return spans_; }

 private:
  std::vector<Span> spans_;
};

}  // namespace rollsim::metrics
