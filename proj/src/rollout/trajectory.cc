// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/rollout/trajectory.h"

#include "rollsim/common/error.h"

namespace rollsim::rollout {

const char *TrajectoryStatusName(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::kResetting:
      return "resetting";
    case TrajectoryStatus::kGenerating:
      return "generating";
    case TrajectoryStatus::kSteppingEnv:
      return "stepping_env";
    case TrajectoryStatus::kAwaitingReward:
      return "awaiting_reward";
    case TrajectoryStatus::kCompleted:
      return "completed";
    case TrajectoryStatus::kAborted:
      return "aborted";
  }
  return "unknown";
}

void Trajectory::Advance(TrajectoryStatus next) {
  using S = TrajectoryStatus;
  bool ok = false;
  switch (status) {
    case S::kResetting:
      ok = next == S::kGenerating;
      break;
    case S::kGenerating:
      ok = next == S::kSteppingEnv;
      break;
    case S::kSteppingEnv:
      ok = next == S::kGenerating || next == S::kAwaitingReward;
      break;
    case S::kAwaitingReward:
      ok = next == S::kCompleted && reward.has_value();
      break;
    case S::kCompleted:
    case S::kAborted:
      ok = false;
      break;
  }
  if (next == S::kAborted && !terminal()) ok = true;
  if (!ok) {
    throw StateError("trajectory " + std::to_string(trajectory_id) + ": illegal transition " +
                     TrajectoryStatusName(status) + " -> " + TrajectoryStatusName(next));
  }
  status = next;
}

sim::SimTime Trajectory::generation_time() const {
  sim::SimTime total = 0.0;
  for (const auto &t : turns) total += t.t_generated - t.t_start;
  return total;
}

sim::SimTime Trajectory::env_step_time() const {
  sim::SimTime total = 0.0;
  for (const auto &t : turns) total += t.t_end - t.t_generated;
  return total;
}

nlohmann::json TrajectoryToJson(const Trajectory &t) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto &r : t.turns) {
    turns.push_back({{"env_id", r.env_id},
                     {"context_tokens", r.context_tokens},
                     {"obs_tokens", r.obs_tokens},
                     {"action_tokens", r.action_tokens},
                     {"t_start", r.t_start},
                     {"t_generated", r.t_generated},
                     {"t_end", r.t_end},
                     {"version", r.version}});
  }
  nlohmann::json j = {{"trajectory_id", t.trajectory_id},
                      {"group_id", t.group_id},
                      {"member", t.member},
                      {"task_tag", t.task_tag},
                      {"init_version", t.init_version},
                      {"env_id", t.env_id},
                      {"status", TrajectoryStatusName(t.status)},
                      {"prompt_tokens", t.prompt_tokens},
                      {"response_tokens", t.response_tokens},
                      {"launch_time", t.launch_time},
                      {"reset_done", t.reset_done},
                      {"rollout_done", t.rollout_done},
                      {"end_time", t.end_time},
                      {"env_failures", t.env_failures},
                      {"turns", std::move(turns)}};
  j["reward"] = t.reward ? nlohmann::json(*t.reward) : nlohmann::json(nullptr);
  if (!t.abort_cause.empty()) j["abort_cause"] = t.abort_cause;
  return j;
}

}  // namespace rollsim::rollout
