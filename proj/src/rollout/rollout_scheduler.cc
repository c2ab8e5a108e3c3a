// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/rollout/rollout_scheduler.h"

#include <cmath>

#include "rollsim/common/error.h"

namespace rollsim::rollout {

const char *RolloutModeName(RolloutMode m) {
  return m == RolloutMode::kTrajectory ? "trajectory" : "batch";
}

RolloutMode ParseRolloutMode(const std::string &name) {
  if (name == "trajectory") return RolloutMode::kTrajectory;
  if (name == "batch") return RolloutMode::kBatch;
  throw InvalidArgument("unknown rollout mode '" + name + "'");
}

void RolloutConfig::Validate() const {
  std::vector<std::string> diags;
  if (tasks.empty()) diags.push_back("rollout: at least one task is required");
  for (const auto &t : tasks) t.Validate();
  if (group_size < 1) diags.push_back("rollout.group_size: must be >= 1");
  if (!(redundancy >= 1.0) || !std::isfinite(redundancy)) {
    diags.push_back("rollout.redundancy: must be a finite value >= 1");
  }
  if (mode == RolloutMode::kBatch && redundancy != 1.0) {
    diags.push_back("rollout.redundancy: batch mode runs without redundant environments");
  }
  if (env.max_new_tokens < 1) diags.push_back("rollout.max_new_tokens: must be >= 1");
  if (env.retry_budget < 0) diags.push_back("rollout.retry_budget: must be >= 0");
  if (!sim::IsValidDuration(env.reward_retry_backoff) || env.reward_retry_backoff <= 0) {
    diags.push_back("rollout.reward_retry_backoff: must be > 0");
  }
  if (replacement_cap_factor < 0) diags.push_back("rollout.replacement_cap: must be >= 0");
  if (max_live_envs < 0) diags.push_back("rollout.max_live_envs: must be >= 0");
  if (!diags.empty()) throw ValidationError(std::move(diags));
}

std::vector<int64_t> DistributeLaunches(int64_t groups, int64_t group_size, double redundancy) {
  if (groups < 1 || group_size < 1) throw InvalidArgument("launch: groups and group size must be >= 1");
  const auto total = static_cast<int64_t>(
      std::ceil(redundancy * static_cast<double>(groups * group_size) - 1e-9));
  std::vector<int64_t> per(static_cast<size_t>(groups), group_size);
  int64_t extra = total - groups * group_size;
  for (size_t i = 0; extra > 0; i = (i + 1) % per.size(), --extra) ++per[i];
  return per;
}

RolloutScheduler::RolloutScheduler(sim::Kernel &kernel, RolloutConfig config,
                                   proxy::LlmClient &llm, reward::RewardClient &reward)
    : kernel_(kernel), config_(std::move(config)), llm_(llm), reward_(reward) {
  config_.Validate();
}

RolloutScheduler::~RolloutScheduler() = default;

uint64_t RolloutScheduler::NewGroup(uint64_t version, sim::SimTime now) {
  const uint64_t id = next_group_++;
  GroupInfo g;
  g.group_id = id;
  g.version = version;
  g.target = config_.group_size;
  g.launch_time = now;
  if (config_.tasks.size() > 1) {
    double total = 0.0;
    for (const auto &t : config_.tasks) total += t.weight;
    auto stream = kernel_.Stream("task/" + std::to_string(id));
    double u = stream.Uniform() * total;
    g.task = config_.tasks.size() - 1;
    for (size_t i = 0; i < config_.tasks.size(); ++i) {
      if (u < config_.tasks[i].weight) {
        g.task = i;
        break;
      }
      u -= config_.tasks[i].weight;
    }
  }
  groups_[id] = g;
  ++unsettled_;
  return id;
}

uint64_t RolloutScheduler::LaunchGroup(uint64_t version) {
  if (config_.mode == RolloutMode::kBatch) {
    throw StateError("rollout: batch mode launches whole batches only");
  }
  const auto per = DistributeLaunches(1, config_.group_size, config_.redundancy);
  const uint64_t id = NewGroup(version, kernel_.Now());
  groups_[id].initial_launch = per[0];
  for (int64_t m = 0; m < per[0]; ++m) Spawn(id, nullptr);
  return id;
}

std::vector<uint64_t> RolloutScheduler::LaunchBatch(int64_t groups, uint64_t version) {
  const auto per = DistributeLaunches(groups, config_.group_size, config_.redundancy);
  std::shared_ptr<Barrier> barrier;
  if (config_.mode == RolloutMode::kBatch) barrier = std::make_shared<Barrier>();
  std::vector<uint64_t> ids;
  for (int64_t i = 0; i < groups; ++i) {
    ids.push_back(NewGroup(version, kernel_.Now()));
    groups_[ids.back()].initial_launch = per[static_cast<size_t>(i)];
  }
  // Create every member first so a lockstep barrier knows the full batch.
  for (size_t i = 0; i < ids.size(); ++i) {
    for (int64_t m = 0; m < per[i]; ++m) {
      Spawn(ids[i], barrier);
    }
  }
  return ids;
}

EnvManager *RolloutScheduler::Spawn(uint64_t group_id, std::shared_ptr<Barrier> barrier) {
  GroupInfo &g = groups_.at(group_id);
  const workload::TaskSpec &task = config_.tasks[g.task];
  const int64_t member = g.launched++;
  auto stream =
      kernel_.Stream("group/" + std::to_string(group_id) + "/" + std::to_string(member));
  EnvPlan plan = DrawEnvPlan(task, stream);

  Trajectory t;
  t.trajectory_id = next_trajectory_++;
  t.group_id = group_id;
  t.member = member;
  t.task_tag = task.tag;
  t.reward_class = task.reward_class;
  t.init_version = member < g.initial_launch ? g.version : std::max(g.version, serving_version_);

  const uint64_t tid = t.trajectory_id;
  Member m;
  m.barrier = barrier;
  m.env = std::make_unique<EnvManager>(
      kernel_, llm_, reward_, task, config_.env, std::move(t), std::move(plan), barrier != nullptr,
      &next_request_, [this](EnvManager &env, EnvManager::Signal s) { OnSignal(env, s); });
  if (barrier) barrier->members.push_back(m.env.get());
  EnvManager *raw = m.env.get();
  members_.emplace(tid, std::move(m));
  group_members_[group_id].push_back(tid);
  ++stats_.launched;
  StartOrQueue(tid);
  return raw;
}

void RolloutScheduler::StartOrQueue(uint64_t trajectory_id) {
  if (config_.max_live_envs > 0 && live_ >= config_.max_live_envs) {
    launch_queue_.push_back(trajectory_id);
    return;
  }
  Member &m = members_.at(trajectory_id);
  m.started = true;
  m.running = true;
  ++live_;
  m.env->Start();
}

void RolloutScheduler::StartQueued() {
  while (!launch_queue_.empty() &&
         (config_.max_live_envs == 0 || live_ < config_.max_live_envs)) {
    const uint64_t tid = launch_queue_.front();
    launch_queue_.pop_front();
    Member &m = members_.at(tid);
    if (m.env->trajectory().terminal()) continue;
    m.started = true;
    m.running = true;
    ++live_;
    m.env->Start();
  }
}

void RolloutScheduler::ReleaseSlot(Member &m) {
  if (!m.running) return;
  m.running = false;
  --live_;
  StartQueued();
}

void RolloutScheduler::SetServingVersion(uint64_t version) {
  serving_version_ = version;
  for (auto &[tid, m] : members_) {
    if (!m.env->trajectory().terminal()) m.env->SetVersion(version);
  }
}

void RolloutScheduler::OnSignal(EnvManager &env, EnvManager::Signal s) {
  const Trajectory &t = env.trajectory();
  Member &m = members_.at(t.trajectory_id);
  GroupInfo &g = groups_.at(t.group_id);
  switch (s) {
    case EnvManager::Signal::kBarrier:
      CheckBarrier(m.barrier);
      return;
    case EnvManager::Signal::kRolloutDone: {
      m.rollout_done = true;
      ReleaseSlot(m);
      if (m.barrier) CheckBarrier(m.barrier);
      if (g.dead) return;
      ++g.rollout_done;
      if (!g.full && g.rollout_done >= g.target) {
        g.full = true;
        g.full_time = kernel_.Now();
        for (uint64_t other : group_members_[g.group_id]) {
          Member &o = members_.at(other);
          const auto status = o.env->trajectory().status;
          if (status != TrajectoryStatus::kAwaitingReward && !o.env->trajectory().terminal()) {
            AbortMember(o, AbortKind::kSurplus, "surplus after group quota");
          }
        }
      }
      return;
    }
    case EnvManager::Signal::kCompleted:
      ++stats_.completed;
      stats_.env_reset_time += t.reset_done - t.launch_time;
      stats_.generation_time += t.generation_time();
      stats_.env_step_time += t.env_step_time();
      stats_.reward_time += t.reward_done - t.rollout_done;
      if (config_.keep_trajectories) archive_.push_back(t);
      if (g.dead) return;
      ++g.completed;
      if (on_completed_) on_completed_(t);
      if (g.completed >= g.target && !g.dead) Settle(g, true);
      return;
    case EnvManager::Signal::kAborted:
      OnMemberAborted(m);
      return;
  }
}

void RolloutScheduler::AbortMember(Member &m, AbortKind kind, const std::string &cause) {
  m.abort_kind = kind;
  m.env->Abort(cause);
}

void RolloutScheduler::OnMemberAborted(Member &m) {
  const Trajectory &t = m.env->trajectory();
  GroupInfo &g = groups_.at(t.group_id);
  const bool was_done = m.rollout_done;
  ReleaseSlot(m);
  stats_.wasted_tokens += t.prompt_tokens + t.response_tokens;
  if (config_.keep_trajectories) archive_.push_back(t);
  switch (m.abort_kind) {
    case AbortKind::kSurplus:
      ++stats_.surplus_aborts;
      break;
    case AbortKind::kStale:
      ++stats_.stale_aborts;
      break;
    case AbortKind::kFailure:
      ++stats_.failure_aborts;
      break;
    case AbortKind::kGroupFailed:
      break;
  }
  if (m.barrier) CheckBarrier(m.barrier);
  if (g.dead || g.settled()) return;
  if (was_done) {
    --g.rollout_done;
    g.full = g.rollout_done >= g.target;
  }
  if (m.abort_kind != AbortKind::kFailure) return;

  int64_t viable = g.completed;
  for (uint64_t other : group_members_[g.group_id]) {
    const auto &ot = members_.at(other).env->trajectory();
    if (!ot.terminal()) ++viable;
  }
  const auto cap = static_cast<int64_t>(
      std::floor(config_.replacement_cap_factor * static_cast<double>(g.initial_launch)));
  while (viable < g.target) {
    if (g.launched - g.initial_launch >= cap) {
      ++stats_.failed_groups;
      g.dead = true;
      for (uint64_t other : group_members_[g.group_id]) {
        Member &o = members_.at(other);
        if (!o.env->trajectory().terminal()) {
          AbortMember(o, AbortKind::kGroupFailed, "group failed: replacement cap exceeded");
        }
      }
      Settle(g, false);
      return;
    }
    ++stats_.replacements;
    Spawn(g.group_id, nullptr);
    ++viable;
  }
}

void RolloutScheduler::CheckBarrier(const std::shared_ptr<Barrier> &barrier) {
  if (!barrier) return;
  size_t participants = 0;
  size_t waiting = 0;
  for (EnvManager *env : barrier->members) {
    const auto status = env->trajectory().status;
    if (env->trajectory().terminal() || status == TrajectoryStatus::kAwaitingReward) continue;
    ++participants;
    if (env->waiting_at_barrier()) ++waiting;
  }
  if (participants == 0 || waiting < participants) return;
  for (EnvManager *env : barrier->members) {
    if (env->waiting_at_barrier()) env->Proceed();
  }
}

void RolloutScheduler::AbortGroup(uint64_t group_id, const std::string &cause, bool stale) {
  GroupInfo &g = groups_.at(group_id);
  if (g.settled()) return;
  g.dead = true;
  for (uint64_t tid : group_members_[group_id]) {
    Member &m = members_.at(tid);
    if (!m.env->trajectory().terminal()) {
      AbortMember(m, stale ? AbortKind::kStale : AbortKind::kGroupFailed, cause);
    }
  }
  Settle(g, false);
}

int64_t RolloutScheduler::AbortStale(uint64_t min_version) {
  const int64_t before = stats_.stale_aborts;
  std::vector<uint64_t> doomed;
  for (const auto &[id, g] : groups_) {
    if (!g.settled() && g.version < min_version) doomed.push_back(id);
  }
  for (uint64_t id : doomed) AbortGroup(id, "stale: initiated before version " +
                                                std::to_string(min_version), true);
  return stats_.stale_aborts - before;
}

void RolloutScheduler::Settle(GroupInfo &g, bool ok) {
  g.settle_time = kernel_.Now();
  --unsettled_;
  if (on_group_) on_group_(g, ok);
}

}  // namespace rollsim::rollout
