// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/cluster/cluster.h"
#include "rollsim/reward/reward_client.h"
#include "rollsim/sim/distribution.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/model_spec.h"

namespace rollsim::reward {

enum class RewardMode { kServerless, kDedicated };

const char *RewardModeName(RewardMode m);
RewardMode ParseRewardMode(const std::string &name);

struct RewardServiceConfig {
  RewardMode mode = RewardMode::kServerless;
  /// Serverless: instance ceiling. Dedicated: number of reserved devices,
  /// each serving one request at a time.
  int64_t max_instances = 64;
  sim::SimTime cold_start = 5.0;
  sim::SimTime idle_timeout = 60.0;
  /// Requests allowed to wait; further ones are throttled. 0 = unbounded.
  int64_t queue_cap = 0;
  sim::SimTime rule_based_time = 0.1;
  sim::LatencyDistribution sandbox_time = sim::LatencyDistribution::LogNormalFromTail(2.0, 5.0);
  workload::ModelSpec judge_model;
  /// Profile of one instance (one device).
  workload::HardwareProfile judge_hw;

  void Validate() const;
};

struct InstanceSample {
  sim::SimTime time;
  int64_t instances;
  int64_t busy;
};

/// Reward computation pool.
///
/// Serverless mode scales reactively: an instance cold-starts whenever work
/// is queued and no idle or starting instance can take it, and an instance
/// idle for `idle_timeout` is released. Dedicated mode keeps
/// `max_instances` devices warm for the whole run.
class RewardService : public RewardClient, public cluster::ServerlessBackend {
 public:
  RewardService(sim::Kernel &kernel, std::string name, RewardServiceConfig config);

  void Invoke(RewardRequest request) override;
  /// Endpoint form: input {trajectory_id, task_tag, cost_class, payload_tokens}.
  void Invoke(const nlohmann::json &input,
              std::function<void(const cluster::ServerlessResult &)> done) override;

  /// Service time for a request, excluding queueing and cold start.
  sim::SimTime ServiceTime(uint64_t trajectory_id, workload::RewardClass cost_class,
                           int64_t payload_tokens) const;

  /// Busy device-seconds inside [from, to).
  double BusyWithin(sim::SimTime from, sim::SimTime to) const;
  /// Dedicated: busy / (window * devices). Serverless: busy / provisioned
  /// instance-seconds inside the window (0 when nothing was provisioned).
  double Utilization(sim::SimTime from, sim::SimTime to) const;
  double ProvisionedWithin(sim::SimTime from, sim::SimTime to) const;

  int64_t instances() const { return static_cast<int64_t>(instances_.size()); }
  int64_t queued() const { return static_cast<int64_t>(queue_.size()); }
  int64_t served() const { return served_; }
  int64_t throttled() const { return throttled_; }
  int64_t cold_starts() const { return cold_starts_; }
  const std::vector<InstanceSample> &series() const { return series_; }
  const RewardServiceConfig &config() const { return config_; }
  sim::ActorId actor() const { return actor_; }

 private:
  struct Job {
    RewardRequest request;
    sim::SimTime enqueued;
  };
  struct Instance {
    uint64_t id;
    bool warm = false;
    bool busy = false;
    sim::SimTime provisioned_at = 0.0;
    std::optional<sim::EventId> idle_timer;
  };

  void Dispatch();
  void StartJob(Instance &inst, Job job);
  void ArmIdle(Instance &inst);
  Instance *FindInstance(uint64_t id);
  void Record();

  sim::Kernel &kernel_;
  std::string name_;
  RewardServiceConfig config_;
  sim::ActorId actor_;
  std::deque<Job> queue_;
  std::vector<Instance> instances_;
  uint64_t next_instance_ = 0;
  int64_t served_ = 0;
  int64_t throttled_ = 0;
  int64_t cold_starts_ = 0;
  /// Per-device busy intervals (overlapping across devices).
  std::vector<std::pair<sim::SimTime, sim::SimTime>> busy_spans_;
  /// Closed provisioning intervals of released instances.
  std::vector<std::pair<sim::SimTime, sim::SimTime>> provisioned_;
  std::vector<InstanceSample> series_;
};

}  // namespace rollsim::reward
