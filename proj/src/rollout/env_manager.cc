// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/rollout/env_manager.h"

#include "rollsim/common/error.h"

namespace rollsim::rollout {

int64_t EnvPlan::ContextAt(int64_t k) const {
  int64_t ctx = initial_prompt_tokens;
  for (int64_t i = 1; i <= k; ++i) ctx += action_tokens[i - 1] + obs_tokens[i];
  return ctx;
}

EnvPlan DrawEnvPlan(const workload::TaskSpec &task, sim::RandomStream &stream) {
  EnvPlan plan;
  plan.turns = task.turns.Sample(stream);
  if (plan.turns < 1) throw InvalidArgument("task " + task.tag + ": drew fewer than one turn");
  plan.initial_prompt_tokens = task.initial_prompt_tokens.Sample(stream);
  plan.reset = task.env_reset_dist.SampleDetailed(stream);
  plan.obs_tokens.assign(static_cast<size_t>(plan.turns), 0);
  plan.action_tokens.assign(static_cast<size_t>(plan.turns), 0);
  for (int64_t k = 0; k < plan.turns; ++k) {
    const int64_t obs = task.prompt_tokens_per_turn.Sample(stream);
    if (k > 0) plan.obs_tokens[k] = obs;
    plan.action_tokens[k] = std::max<int64_t>(1, task.response_tokens_per_turn.Sample(stream));
    plan.steps.push_back(task.env_step_dist.SampleDetailed(stream));
  }
  return plan;
}

EnvManager::EnvManager(sim::Kernel &kernel, proxy::LlmClient &llm, reward::RewardClient &reward,
                       const workload::TaskSpec &task, EnvSettings settings, Trajectory trajectory,
                       EnvPlan plan, bool lockstep, uint64_t *next_request_id, Listener listener)
    : kernel_(kernel),
      llm_(llm),
      reward_(reward),
      task_(task),
      settings_(settings),
      trajectory_(std::move(trajectory)),
      plan_(std::move(plan)),
      lockstep_(lockstep),
      next_request_id_(next_request_id),
      listener_(std::move(listener)),
      version_(trajectory_.init_version) {
  actor_ = kernel_.RegisterActor("env/" + std::to_string(trajectory_.trajectory_id));
  trajectory_.env_id = "env-" + std::to_string(trajectory_.trajectory_id);
  trajectory_.prompt_tokens = plan_.initial_prompt_tokens;
}

void EnvManager::Start() {
  trajectory_.launch_time = kernel_.Now();
  timer_ = kernel_.Schedule(plan_.reset.value, actor_, "env_reset", [this]() { OnResetDone(); },
                            "traj=" + std::to_string(trajectory_.trajectory_id));
}

bool EnvManager::CountFailure(bool failed, const char *what) {
  if (!failed) return true;
  ++trajectory_.env_failures;
  if (trajectory_.env_failures > settings_.retry_budget) {
    Abort(std::string(what) + " failed beyond retry budget");
    return false;
  }
  return true;
}

void EnvManager::OnResetDone() {
  timer_.reset();
  if (!CountFailure(plan_.reset.failed, "env.reset")) return;
  trajectory_.reset_done = kernel_.Now();
  if (lockstep_) {
    at_barrier_ = true;
    Emit(Signal::kBarrier);
    return;
  }
  BeginTurn();
}

void EnvManager::Proceed() {
  if (!at_barrier_ || trajectory_.terminal()) return;
  at_barrier_ = false;
  BeginTurn();
}

void EnvManager::BeginTurn() {
  trajectory_.Advance(TrajectoryStatus::kGenerating);
  TurnRecord turn;
  turn.env_id = trajectory_.env_id;
  turn.context_tokens = plan_.ContextAt(turn_);
  turn.obs_tokens = turn_ == 0 ? plan_.initial_prompt_tokens : plan_.obs_tokens[turn_];
  turn.t_start = kernel_.Now();
  turn.version = version_;
  if (turn_ > 0) trajectory_.prompt_tokens += plan_.obs_tokens[turn_];
  trajectory_.turns.push_back(turn);

  proxy::GenerationRequest req;
  req.request_id = (*next_request_id_)++;
  req.trajectory_id = trajectory_.trajectory_id;
  req.tag = task_.routing_tag();
  req.context_tokens = turn.context_tokens;
  req.max_new_tokens = settings_.max_new_tokens;
  req.stop_after_tokens = plan_.action_tokens[turn_];
  req.reply_to = actor_;
  req.callback = [this](const proxy::GenerationResult &r) { OnGenerated(r); };
  inflight_request_ = req.request_id;
  llm_.Submit(std::move(req));
}

void EnvManager::OnGenerated(const proxy::GenerationResult &result) {
  if (!inflight_request_ || *inflight_request_ != result.request_id) return;
  inflight_request_.reset();
  if (trajectory_.terminal()) return;
  if (result.status != proxy::GenerationStatus::kCompleted) {
    Abort("generation " + std::string(proxy::GenerationStatusName(result.status)) +
          (result.error.empty() ? "" : ": " + result.error));
    return;
  }
  TurnRecord &turn = trajectory_.turns.back();
  turn.t_generated = kernel_.Now();
  turn.action_tokens = result.decoded_tokens;
  turn.recompute_tokens = result.recompute_tokens;
  trajectory_.response_tokens += result.decoded_tokens;
  trajectory_.Advance(TrajectoryStatus::kSteppingEnv);
  const auto &draw = plan_.steps[turn_];
  timer_ = kernel_.Schedule(draw.value, actor_, "env_step", [this]() { OnStepDone(); },
                            "traj=" + std::to_string(trajectory_.trajectory_id) +
                                " turn=" + std::to_string(turn_));
}

void EnvManager::OnStepDone() {
  timer_.reset();
  if (!CountFailure(plan_.steps[turn_].failed, "env.step")) return;
  trajectory_.turns.back().t_end = kernel_.Now();
  ++turn_;
  if (turn_ < plan_.turns) {
    if (lockstep_) {
      at_barrier_ = true;
      Emit(Signal::kBarrier);
      return;
    }
    BeginTurn();
    return;
  }
  trajectory_.rollout_done = kernel_.Now();
  trajectory_.Advance(TrajectoryStatus::kAwaitingReward);
  Emit(Signal::kRolloutDone);
  if (trajectory_.terminal()) return;
  RequestReward();
}

void EnvManager::RequestReward() {
  reward::RewardRequest req;
  req.trajectory_id = trajectory_.trajectory_id;
  req.task_tag = trajectory_.task_tag;
  req.cost_class = trajectory_.reward_class;
  req.payload_tokens = trajectory_.prompt_tokens + trajectory_.response_tokens;
  req.reply_to = actor_;
  req.callback = [this](const reward::RewardOutcome &o) { OnReward(o); };
  reward_.Invoke(std::move(req));
}

void EnvManager::OnReward(const reward::RewardOutcome &outcome) {
  if (trajectory_.terminal()) return;
  if (outcome.throttled) {
    timer_ = kernel_.Schedule(settings_.reward_retry_backoff, actor_, "reward_retry",
                              [this]() {
                                timer_.reset();
                                RequestReward();
                              },
                              "traj=" + std::to_string(trajectory_.trajectory_id));
    return;
  }
  if (!outcome.ok) {
    Abort("reward failed: " + outcome.error);
    return;
  }
  trajectory_.reward = outcome.reward;
  trajectory_.reward_done = kernel_.Now();
  trajectory_.end_time = kernel_.Now();
  trajectory_.Advance(TrajectoryStatus::kCompleted);
  Emit(Signal::kCompleted);
}

void EnvManager::Abort(const std::string &cause) {
  if (trajectory_.terminal()) return;
  if (timer_) {
    kernel_.Cancel(*timer_);
    timer_.reset();
  }
  if (inflight_request_) {
    const uint64_t id = *inflight_request_;
    inflight_request_.reset();
    llm_.Abort(id);
  }
  at_barrier_ = false;
  trajectory_.abort_cause = cause;
  trajectory_.end_time = kernel_.Now();
  trajectory_.Advance(TrajectoryStatus::kAborted);
  Emit(Signal::kAborted);
}

}  // namespace rollsim::rollout
