// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rollsim/proxy/generation.h"
#include "rollsim/reward/reward_client.h"
#include "rollsim/rollout/env_manager.h"
#include "rollsim/rollout/trajectory.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/workload/task_spec.h"

namespace rollsim::rollout {

enum class RolloutMode { kTrajectory, kBatch };

const char *RolloutModeName(RolloutMode m);
RolloutMode ParseRolloutMode(const std::string &name);

struct RolloutConfig {
  std::vector<workload::TaskSpec> tasks;
  int64_t group_size = 8;
  /// Launched environments = ceil(redundancy * groups * group_size).
  double redundancy = 1.0;
  RolloutMode mode = RolloutMode::kTrajectory;
  EnvSettings env;
  /// Replacements per group are capped at this multiple of its launch count.
  double replacement_cap_factor = 2.0;
  /// Concurrently running environments (CPU pool); 0 means unlimited.
  int64_t max_live_envs = 0;
  bool keep_trajectories = false;

  void Validate() const;
};

/// Number of environments each of `groups` groups gets when
/// ceil(r * groups * g) are spread round-robin over them.
std::vector<int64_t> DistributeLaunches(int64_t groups, int64_t group_size, double redundancy);

/// Launches and supervises environment managers group by group.
///
/// A group is "full" once `group_size` of its members finished their last
/// turn; the remaining members are aborted right away as surplus. Members
/// lost to failures are replaced while the group can still fill. Completed
/// (rewarded) trajectories are handed to the completion listener.
class RolloutScheduler {
 public:
  struct Stats {
    int64_t launched = 0;
    int64_t completed = 0;
    int64_t surplus_aborts = 0;
    int64_t stale_aborts = 0;
    int64_t failure_aborts = 0;
    int64_t replacements = 0;
    int64_t failed_groups = 0;
    /// Prompt + response tokens of trajectories that were aborted.
    int64_t wasted_tokens = 0;
    /// Seconds summed over completed trajectories.
    double env_reset_time = 0.0;
    double generation_time = 0.0;
    double env_step_time = 0.0;
    double reward_time = 0.0;
  };
  struct GroupInfo {
    uint64_t group_id = 0;
    uint64_t version = 0;
    size_t task = 0;
    int64_t launched = 0;
    int64_t initial_launch = 0;
    int64_t rollout_done = 0;
    int64_t completed = 0;
    bool full = false;
    bool dead = false;
    sim::SimTime launch_time = 0.0;
    sim::SimTime full_time = 0.0;
    sim::SimTime settle_time = 0.0;
    bool settled() const { return dead || completed >= target; }
    int64_t target = 0;
  };

  using CompletionListener = std::function<void(const Trajectory &)>;
  /// Fires once per group when it completes or dies (`ok` = completed).
  /// Environment managers live as long as the scheduler, since late
  /// generation or reward replies may still reach them after an abort.
  using GroupListener = std::function<void(const GroupInfo &, bool ok)>;

  RolloutScheduler(sim::Kernel &kernel, RolloutConfig config, proxy::LlmClient &llm,
                   reward::RewardClient &reward);
  ~RolloutScheduler();

  void SetCompletionListener(CompletionListener l) { on_completed_ = std::move(l); }
  void SetGroupListener(GroupListener l) { on_group_ = std::move(l); }

  /// Trajectory-level: one group with ceil(r * g) environments.
  uint64_t LaunchGroup(uint64_t version);
  /// `groups` groups sharing ceil(r * groups * g) environments. In batch
  /// mode the environments advance turn by turn in lockstep.
  std::vector<uint64_t> LaunchBatch(int64_t groups, uint64_t version);

  void AbortGroup(uint64_t group_id, const std::string &cause, bool stale);
  /// Aborts every unsettled group initiated before `min_version`. Returns
  /// the number of trajectories aborted.
  int64_t AbortStale(uint64_t min_version);

  /// Version used for turns started from now on.
  void SetServingVersion(uint64_t version);

  int64_t unsettled_groups() const { return unsettled_; }
  int64_t live_envs() const { return live_; }
  const Stats &stats() const { return stats_; }
  const GroupInfo &group(uint64_t id) const { return groups_.at(id); }
  const std::map<uint64_t, GroupInfo> &groups() const { return groups_; }
  /// Finished (completed or aborted) trajectories, if keep_trajectories.
  const std::vector<Trajectory> &archive() const { return archive_; }
  const RolloutConfig &config() const { return config_; }

 private:
  struct Barrier {
    std::vector<EnvManager *> members;
  };
  enum class AbortKind { kFailure, kSurplus, kStale, kGroupFailed };
  struct Member {
    std::unique_ptr<EnvManager> env;
    std::shared_ptr<Barrier> barrier;
    bool started = false;
    /// Holds a CPU slot (started and not yet past its last turn).
    bool running = false;
    bool rollout_done = false;
    AbortKind abort_kind = AbortKind::kFailure;
  };

  uint64_t NewGroup(uint64_t version, sim::SimTime now);
  EnvManager *Spawn(uint64_t group_id, std::shared_ptr<Barrier> barrier);
  void StartOrQueue(uint64_t trajectory_id);
  void StartQueued();
  void OnSignal(EnvManager &env, EnvManager::Signal s);
  void OnMemberAborted(Member &m);
  void AbortMember(Member &m, AbortKind kind, const std::string &cause);
  void ReleaseSlot(Member &m);
  void CheckBarrier(const std::shared_ptr<Barrier> &barrier);
  void Settle(GroupInfo &g, bool ok);

  sim::Kernel &kernel_;
  RolloutConfig config_;
  proxy::LlmClient &llm_;
  reward::RewardClient &reward_;
  CompletionListener on_completed_;
  GroupListener on_group_;

  uint64_t next_group_ = 0;
  uint64_t next_trajectory_ = 0;
  uint64_t next_request_ = 0;
  uint64_t serving_version_ = 0;
  std::map<uint64_t, GroupInfo> groups_;
  std::map<uint64_t, std::vector<uint64_t>> group_members_;
  std::map<uint64_t, Member> members_;
  std::deque<uint64_t> launch_queue_;
  std::vector<Trajectory> archive_;
  int64_t unsettled_ = 0;
  int64_t live_ = 0;
  Stats stats_;
};

}  // namespace rollsim::rollout
