// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "rollsim/sim/kernel.h"
#include "rollsim/workload/task_spec.h"

namespace rollsim::reward {

struct RewardOutcome {
  bool ok = true;
  /// Rejected because the service queue was full; the caller may retry.
  bool throttled = false;
  double reward = 0.0;
  /// Queueing + cold start + service time.
  sim::SimTime latency = 0.0;
  std::string error;
};

struct RewardRequest {
  uint64_t trajectory_id = 0;
  std::string task_tag;
  workload::RewardClass cost_class = workload::RewardClass::kRuleBased;
  int64_t payload_tokens = 0;
  sim::ActorId reply_to;
  std::function<void(const RewardOutcome &)> callback;
};

/// Asynchronous reward computation. Implemented by RewardService and by
/// test doubles.
class RewardClient {
 public:
  virtual ~RewardClient() = default;
  virtual void Invoke(RewardRequest request) = 0;
};

/// Deterministic pseudo-reward in [0, 1] derived from the trajectory id and
/// cost class only.
double PseudoReward(uint64_t trajectory_id, workload::RewardClass cost_class);

}  // namespace rollsim::reward
