// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rollsim/metrics/utilization.h"
#include "rollsim/sim/time.h"
#include "rollsim/train/pipeline.h"

namespace rollsim::metrics {

/// Tokens per second; throws InvalidArgument unless step_time > 0.
double Throughput(int64_t prompt_tokens, int64_t response_tokens, sim::SimTime step_time);

/// Busy fraction of [from, to); throws InvalidArgument for an empty window.
double Utilization(const BusyTimeline &timeline, sim::SimTime from, sim::SimTime to);
/// Mean busy fraction over several devices or workers.
double Utilization(const std::vector<const BusyTimeline *> &timelines, sim::SimTime from,
                   sim::SimTime to);

struct StepReport {
  train::PhaseReport phases;
  double throughput = 0.0;
  /// Pool label -> busy fraction over the step window.
  std::map<std::string, double> utilization;
};

/// Sum of the accounted phases plus idle; equals step_time by construction.
sim::SimTime AccountedTime(const train::PhaseReport &r);

struct RunSummary {
  int64_t steps = 0;
  double mean_step_time = 0.0;
  double mean_throughput = 0.0;
  double mean_rollout_time = 0.0;
  double makespan = 0.0;
  int64_t stale_aborts = 0;
  int64_t wasted_tokens = 0;
  /// Mean over steps, excluding the first `warmup` steps when possible.
  static RunSummary From(const std::vector<StepReport> &reports, int64_t warmup = 0);
};

}  // namespace rollsim::metrics
