// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rollsim/sim/time.h"
#include "rollsim/workload/task_spec.h"

namespace rollsim::rollout {

enum class TrajectoryStatus {
  kResetting,
  kGenerating,
  kSteppingEnv,
  kAwaitingReward,
  kCompleted,
  kAborted,
};

const char *TrajectoryStatusName(TrajectoryStatus s);

struct TurnRecord {
  std::string env_id;
  int64_t context_tokens = 0;
  int64_t obs_tokens = 0;
  int64_t action_tokens = 0;
  sim::SimTime t_start = 0.0;
  /// When the generated action came back from the proxy.
  sim::SimTime t_generated = 0.0;
  sim::SimTime t_end = 0.0;
  uint64_t version = 0;
  int64_t recompute_tokens = 0;
};

struct Trajectory {
  uint64_t trajectory_id = 0;
  uint64_t group_id = 0;
  /// Member index inside the group; replacements continue the numbering.
  int64_t member = 0;
  std::string task_tag;
  workload::RewardClass reward_class = workload::RewardClass::kRuleBased;
  uint64_t init_version = 0;
  std::string env_id;
  std::vector<TurnRecord> turns;
  TrajectoryStatus status = TrajectoryStatus::kResetting;
  std::optional<double> reward;
  int64_t prompt_tokens = 0;
  int64_t response_tokens = 0;

  sim::SimTime launch_time = 0.0;
  /// Reset finished (including failure penalties).
  sim::SimTime reset_done = 0.0;
  /// Last turn finished; the reward request was dispatched at this time.
  sim::SimTime rollout_done = 0.0;
  sim::SimTime reward_done = 0.0;
  sim::SimTime end_time = 0.0;
  int64_t env_failures = 0;
  std::string abort_cause;

  /// Moves to `next`, throwing StateError on an out-of-order transition.
  void Advance(TrajectoryStatus next);
  bool terminal() const {
    return status == TrajectoryStatus::kCompleted || status == TrajectoryStatus::kAborted;
  }
  sim::SimTime generation_time() const;
  sim::SimTime env_step_time() const;
};

nlohmann::json TrajectoryToJson(const Trajectory &t);

}  // namespace rollsim::rollout
