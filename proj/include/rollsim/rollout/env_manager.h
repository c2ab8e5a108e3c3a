// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/proxy/generation.h"
#include "rollsim/reward/reward_client.h"
#include "rollsim/rollout/trajectory.h"
#include "rollsim/sim/distribution.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/workload/task_spec.h"

namespace rollsim::rollout {

/// Everything a trajectory will do, drawn up front from its own stream so
/// that scheduling (aborts, contention, other environments) cannot change
/// its content.
struct EnvPlan {
  int64_t turns = 1;
  int64_t initial_prompt_tokens = 1;
  /// Observation tokens appended before turn k; entry 0 is unused.
  std::vector<int64_t> obs_tokens;
  std::vector<int64_t> action_tokens;
  sim::LatencyDistribution::Draw reset;
  std::vector<sim::LatencyDistribution::Draw> steps;

  /// Context the policy sees at turn k.
  int64_t ContextAt(int64_t k) const;
};

EnvPlan DrawEnvPlan(const workload::TaskSpec &task, sim::RandomStream &stream);

struct EnvSettings {
  int64_t max_new_tokens = 1 << 20;
  /// Failed env operations tolerated per trajectory before it is aborted.
  int64_t retry_budget = 3;
  sim::SimTime reward_retry_backoff = 1.0;
};

/// Lifecycle of one environment: reset, then generate/step turns through the
/// LLM client, then a non-blocking reward request.
///
/// In lockstep mode the manager stops after reset and after every turn but
/// the last and waits for Proceed(); the rollout scheduler releases the
/// whole batch together.
class EnvManager {
 public:
  enum class Signal { kBarrier, kRolloutDone, kCompleted, kAborted };
  using Listener = std::function<void(EnvManager &, Signal)>;

  EnvManager(sim::Kernel &kernel, proxy::LlmClient &llm, reward::RewardClient &reward,
             const workload::TaskSpec &task, EnvSettings settings, Trajectory trajectory,
             EnvPlan plan, bool lockstep, uint64_t *next_request_id, Listener listener);
  EnvManager(const EnvManager &) = delete;
  EnvManager &operator=(const EnvManager &) = delete;

  void Start();
  /// Releases a lockstep barrier.
  void Proceed();
  /// No-op once the trajectory is terminal.
  void Abort(const std::string &cause);

  /// Policy version used for the turns generated from now on.
  void SetVersion(uint64_t version) { version_ = version; }

  const Trajectory &trajectory() const { return trajectory_; }
  const EnvPlan &plan() const { return plan_; }
  bool waiting_at_barrier() const { return at_barrier_; }
  sim::ActorId actor() const { return actor_; }

 private:
  void OnResetDone();
  void BeginTurn();
  void OnGenerated(const proxy::GenerationResult &result);
  void OnStepDone();
  void AfterTurn();
  void RequestReward();
  void OnReward(const reward::RewardOutcome &outcome);
  bool CountFailure(bool failed, const char *what);
  void Emit(Signal s) { listener_(*this, s); }

  sim::Kernel &kernel_;
  proxy::LlmClient &llm_;
  reward::RewardClient &reward_;
  const workload::TaskSpec &task_;
  EnvSettings settings_;
  Trajectory trajectory_;
  EnvPlan plan_;
  bool lockstep_;
  uint64_t *next_request_id_;
  Listener listener_;
  sim::ActorId actor_;
  uint64_t version_;
  int64_t turn_ = 0;
  bool at_barrier_ = false;
  std::optional<uint64_t> inflight_request_;
  std::optional<sim::EventId> timer_;
};

}  // namespace rollsim::rollout
