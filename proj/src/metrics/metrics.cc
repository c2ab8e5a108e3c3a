// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/metrics/metrics.h"

#include <algorithm>

#include "rollsim/common/error.h"

namespace rollsim::metrics {

double Throughput(int64_t prompt_tokens, int64_t response_tokens, sim::SimTime step_time) {
  if (!(step_time > 0.0)) throw InvalidArgument("throughput: step time must be > 0");
  return static_cast<double>(prompt_tokens + response_tokens) / step_time;
}

double Utilization(const BusyTimeline &timeline, sim::SimTime from, sim::SimTime to) {
  if (!(to > from)) throw InvalidArgument("utilization: empty window");
  return timeline.BusyWithin(from, to) / (to - from);
}

double Utilization(const std::vector<const BusyTimeline *> &timelines, sim::SimTime from,
                   sim::SimTime to) {
  if (!(to > from)) throw InvalidArgument("utilization: empty window");
  if (timelines.empty()) return 0.0;
  double total = 0.0;
  for (const auto *t : timelines) total += Utilization(*t, from, to);
  return total / static_cast<double>(timelines.size());
}

sim::SimTime AccountedTime(const train::PhaseReport &r) {
  return r.get_batch_stall + r.train_compute + r.recovery + r.suspend_window + r.idle;
}

RunSummary RunSummary::From(const std::vector<StepReport> &reports, int64_t warmup) {
  RunSummary s;
  s.steps = static_cast<int64_t>(reports.size());
  if (reports.empty()) return s;
  s.makespan = reports.back().phases.end;
  size_t first = static_cast<size_t>(std::max<int64_t>(0, warmup));
  if (first >= reports.size()) first = 0;
  const auto n = static_cast<double>(reports.size() - first);
  for (size_t i = 0; i < reports.size(); ++i) {
    s.stale_aborts += reports[i].phases.stale_aborts;
    s.wasted_tokens += reports[i].phases.wasted_tokens;
    if (i < first) continue;
    s.mean_step_time += reports[i].phases.step_time / n;
    s.mean_throughput += reports[i].throughput / n;
    s.mean_rollout_time += reports[i].phases.rollout_time / n;
  }
  return s;
}

}  // namespace rollsim::metrics
