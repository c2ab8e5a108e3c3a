// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rollsim/rollout/trajectory.h"
#include "rollsim/sim/kernel.h"

namespace rollsim::buffer {

enum class PutResult { kAccepted, kRejectedStale, kDroppedDeadGroup };

const char *PutResultName(PutResult r);

struct ConsumedRecord {
  /// Trainer version at the moment the batch was handed out.
  uint64_t consumer_version = 0;
  uint64_t trajectory_id = 0;
  uint64_t group_id = 0;
  uint64_t init_version = 0;
  int64_t prompt_tokens = 0;
  int64_t response_tokens = 0;
  sim::SimTime time = 0.0;
};

struct OccupancySample {
  sim::SimTime time;
  int64_t trajectories;
  int64_t complete_groups;
};

/// Staleness-filtered store between trajectory producers and the trainer.
///
/// Holds completed trajectories by group. A trajectory is admitted only if
/// it was initiated by a version no older than n - alpha, where n is the
/// trainer version; advancing n evicts entries that fall out of that window.
/// Losing any member (reject or evict) kills its whole group, and only
/// complete groups are ever returned by GetBatch.
class SampleBuffer {
 public:
  using BatchCallback = std::function<void(std::vector<rollout::Trajectory>)>;

  SampleBuffer(sim::Kernel &kernel, uint64_t alpha, int64_t group_size);

  PutResult Put(rollout::Trajectory trajectory);
  /// `new_version` must be exactly version() + 1. Returns evicted ids.
  std::vector<uint64_t> OnVersionAdvance(uint64_t new_version);
  /// Answers with the oldest complete groups (by completion time, then group
  /// id) once `batch_size` trajectories are available. One outstanding
  /// request at a time.
  void GetBatch(int64_t batch_size, BatchCallback callback);

  /// Notified when a group is lost to staleness so producers can stop
  /// working on its remaining members.
  void SetGroupKilledListener(std::function<void(uint64_t group_id)> l) {
    on_group_killed_ = std::move(l);
  }

  /// Throws StateError describing the unmet request if one is pending.
  /// Called when the producers can no longer make progress.
  void CheckNotStalled(const std::string &context) const;
  bool has_pending_request() const { return pending_.has_value(); }

  uint64_t version() const { return version_; }
  uint64_t alpha() const { return alpha_; }
  int64_t size() const { return size_; }
  int64_t complete_groups() const { return static_cast<int64_t>(ready_.size()); }
  /// Complete groups not yet handed to the trainer, including a served batch
  /// whose delivery event is still pending.
  int64_t undelivered_groups() const { return complete_groups() + in_delivery_; }
  int64_t stale_rejects() const { return stale_rejects_; }
  int64_t evictions() const { return evictions_; }
  int64_t dead_group_drops() const { return dead_drops_; }
  /// Prompt + response tokens of trajectories rejected, evicted or dropped.
  int64_t discarded_tokens() const { return discarded_tokens_; }
  bool IsDead(uint64_t group_id) const { return dead_.count(group_id) > 0; }
  sim::SimTime total_stall() const { return total_stall_; }
  /// Stall of the most recently answered request.
  sim::SimTime last_stall() const { return last_stall_; }
  const std::vector<ConsumedRecord> &consumption_log() const { return log_; }
  const std::vector<OccupancySample> &occupancy() const { return occupancy_; }

 private:
  struct Group {
    std::vector<rollout::Trajectory> members;
    sim::SimTime complete_time = 0.0;
  };
  struct Pending {
    int64_t batch_size;
    BatchCallback callback;
    sim::SimTime since;
  };

  void Kill(uint64_t group_id);
  void TryServe();
  void Sample();

  sim::Kernel &kernel_;
  sim::ActorId actor_;
  uint64_t alpha_;
  int64_t group_size_;
  uint64_t version_ = 0;
  std::map<uint64_t, Group> groups_;
  /// (completion time, group id) of complete groups.
  std::set<std::pair<sim::SimTime, uint64_t>> ready_;
  std::set<uint64_t> dead_;
  std::optional<Pending> pending_;
  int64_t size_ = 0;
  int64_t in_delivery_ = 0;
  int64_t stale_rejects_ = 0;
  int64_t evictions_ = 0;
  int64_t dead_drops_ = 0;
  int64_t discarded_tokens_ = 0;
  sim::SimTime total_stall_ = 0.0;
  sim::SimTime last_stall_ = 0.0;
  std::vector<ConsumedRecord> log_;
  std::vector<OccupancySample> occupancy_;
  std::function<void(uint64_t)> on_group_killed_;
};

}  // namespace rollsim::buffer
