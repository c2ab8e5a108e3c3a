// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rollsim/sim/time.h"
#include "rollsim/workload/link_model.h"

namespace rollsim::train {

/// One inference pool fetching weights from the staging store.
struct SyncTarget {
  std::string pool;
  workload::LinkModel link;
  /// Intra-pool broadcast bandwidth in bytes/s.
  double broadcast_bw = 0.0;
};

struct StoreOutage {
  sim::SimTime start = 0.0;
  sim::SimTime end = 0.0;
};

struct WeightPublication {
  uint64_t version = 0;
  double bytes = 0.0;
  sim::SimTime publish_start = 0.0;
  /// Time the cross-cluster copy to each pool completes.
  std::map<std::string, sim::SimTime> publish_end;
};

/// Cost of one model_update for the pool that finishes last.
struct SyncBreakdown {
  std::string pool;
  sim::SimTime full_transfer = 0.0;
  sim::SimTime residual = 0.0;
  sim::SimTime broadcast = 0.0;
  sim::SimTime retry = 0.0;
  /// Share of the cross-cluster copy already done when the fetch began.
  double completed_fraction = 0.0;

  sim::SimTime total() const { return retry + residual + broadcast; }
};

/// Versioned staging store between the training and inference clusters.
/// Publication copies run in the background from train-step completion;
/// a fetch only pays for what is still in flight.
class WeightStore {
 public:
  WeightStore(double weight_bytes, std::vector<SyncTarget> targets,
              std::vector<StoreOutage> outages = {}, sim::SimTime backoff_base = 1.0);

  const WeightPublication &Publish(uint64_t version, sim::SimTime start);
  bool HasPublication(uint64_t version) const { return publications_.count(version) > 0; }
  const WeightPublication &publication(uint64_t version) const;
  /// Highest published version, or 0 when nothing was published.
  uint64_t latest() const { return publications_.empty() ? 0 : publications_.rbegin()->first; }

  /// Cost of distributing `version` starting at `now`. Without background
  /// publication the whole copy is paid inside the window.
  SyncBreakdown PlanUpdate(uint64_t version, sim::SimTime now, bool background) const;

  /// Waiting time before a fetch at `now` gets through, retrying with
  /// exponential backoff while the store is down.
  sim::SimTime RetryDelay(sim::SimTime now) const;
  /// Throws InvalidArgument for non-positive bandwidth or bad outages.
  void Validate() const;

  double weight_bytes() const { return weight_bytes_; }
  const std::vector<SyncTarget> &targets() const { return targets_; }

 private:
  double weight_bytes_;
  std::vector<SyncTarget> targets_;
  std::vector<StoreOutage> outages_;
  sim::SimTime backoff_base_;
  std::map<uint64_t, WeightPublication> publications_;
};

}  // namespace rollsim::train
