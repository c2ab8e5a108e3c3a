// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/buffer/sample_buffer.h"

#include <memory>

#include "rollsim/common/error.h"

namespace rollsim::buffer {

const char *PutResultName(PutResult r) {
  switch (r) {
    case PutResult::kAccepted:
      return "accepted";
    case PutResult::kRejectedStale:
      return "rejected_stale";
    case PutResult::kDroppedDeadGroup:
      return "dropped_dead_group";
  }
  return "unknown";
}

SampleBuffer::SampleBuffer(sim::Kernel &kernel, uint64_t alpha, int64_t group_size)
    : kernel_(kernel), alpha_(alpha), group_size_(group_size) {
  if (group_size < 1) throw InvalidArgument("buffer: group size must be >= 1");
  actor_ = kernel_.RegisterActor("sample_buffer");
}

PutResult SampleBuffer::Put(rollout::Trajectory trajectory) {
  if (trajectory.status != rollout::TrajectoryStatus::kCompleted || !trajectory.reward) {
    throw StateError("buffer: put of trajectory " + std::to_string(trajectory.trajectory_id) +
                     " in state " + rollout::TrajectoryStatusName(trajectory.status));
  }
  const uint64_t gid = trajectory.group_id;
  const int64_t tokens = trajectory.prompt_tokens + trajectory.response_tokens;
  if (dead_.count(gid) > 0) {
    ++dead_drops_;
    discarded_tokens_ += tokens;
    return PutResult::kDroppedDeadGroup;
  }
  // init >= n - alpha, written without unsigned underflow.
  if (trajectory.init_version + alpha_ < version_) {
    ++stale_rejects_;
    discarded_tokens_ += tokens;
    Kill(gid);
    Sample();
    return PutResult::kRejectedStale;
  }
  Group &g = groups_[gid];
  g.members.push_back(std::move(trajectory));
  ++size_;
  if (static_cast<int64_t>(g.members.size()) == group_size_) {
    g.complete_time = kernel_.Now();
    ready_.emplace(g.complete_time, gid);
  } else if (static_cast<int64_t>(g.members.size()) > group_size_) {
    throw StateError("buffer: group " + std::to_string(gid) + " received more than " +
                     std::to_string(group_size_) + " trajectories");
  }
  Sample();
  TryServe();
  return PutResult::kAccepted;
}

void SampleBuffer::Kill(uint64_t group_id) {
  if (!dead_.insert(group_id).second) return;
  auto it = groups_.find(group_id);
  if (it != groups_.end()) {
    for (const auto &t : it->second.members) {
      ++evictions_;
      discarded_tokens_ += t.prompt_tokens + t.response_tokens;
    }
    size_ -= static_cast<int64_t>(it->second.members.size());
    ready_.erase({it->second.complete_time, group_id});
    groups_.erase(it);
  }
  if (on_group_killed_) on_group_killed_(group_id);
}

std::vector<uint64_t> SampleBuffer::OnVersionAdvance(uint64_t new_version) {
  if (new_version != version_ + 1) {
    throw StateError("buffer: version must advance by exactly one (" + std::to_string(version_) +
                     " -> " + std::to_string(new_version) + ")");
  }
  version_ = new_version;
  std::vector<uint64_t> evicted;
  std::vector<uint64_t> doomed;
  for (const auto &[gid, g] : groups_) {
    for (const auto &t : g.members) {
      if (t.init_version + alpha_ < version_) {
        doomed.push_back(gid);
        break;
      }
    }
  }
  for (uint64_t gid : doomed) {
    for (const auto &t : groups_.at(gid).members) evicted.push_back(t.trajectory_id);
    Kill(gid);
  }
  Sample();
  return evicted;
}

void SampleBuffer::GetBatch(int64_t batch_size, BatchCallback callback) {
  if (batch_size < 1 || batch_size % group_size_ != 0) {
    throw InvalidArgument("buffer: batch size " + std::to_string(batch_size) +
                          " is not a positive multiple of group size " +
                          std::to_string(group_size_));
  }
  if (pending_) throw StateError("buffer: a get_batch request is already outstanding");
  pending_ = Pending{batch_size, std::move(callback), kernel_.Now()};
  TryServe();
}

void SampleBuffer::TryServe() {
  if (!pending_) return;
  const int64_t groups_needed = pending_->batch_size / group_size_;
  if (static_cast<int64_t>(ready_.size()) < groups_needed) return;

  std::vector<rollout::Trajectory> batch;
  batch.reserve(static_cast<size_t>(pending_->batch_size));
  for (int64_t i = 0; i < groups_needed; ++i) {
    auto it = ready_.begin();
    const uint64_t gid = it->second;
    ready_.erase(it);
    Group g = std::move(groups_.at(gid));
    groups_.erase(gid);
    for (auto &t : g.members) {
      log_.push_back(ConsumedRecord{version_, t.trajectory_id, t.group_id, t.init_version,
                                    t.prompt_tokens, t.response_tokens, kernel_.Now()});
      batch.push_back(std::move(t));
    }
  }
  size_ -= pending_->batch_size;
  last_stall_ = kernel_.Now() - pending_->since;
  total_stall_ += last_stall_;
  Sample();
  auto callback = std::move(pending_->callback);
  pending_.reset();
  auto shared = std::make_shared<std::vector<rollout::Trajectory>>(std::move(batch));
  in_delivery_ += groups_needed;
  kernel_.Schedule(0.0, actor_, "batch_ready",
                   [this, callback, shared, groups_needed]() {
                     in_delivery_ -= groups_needed;
                     callback(std::move(*shared));
                   },
                   "trajectories=" + std::to_string(shared->size()));
}

void SampleBuffer::CheckNotStalled(const std::string &context) const {
  if (!pending_) return;
  throw StateError("buffer: get_batch(" + std::to_string(pending_->batch_size) +
                   ") can never be served (" + context + "); holding " + std::to_string(size_) +
                   " trajectories in " + std::to_string(ready_.size()) + " complete of " +
                   std::to_string(groups_.size()) + " groups at version " +
                   std::to_string(version_));
}

void SampleBuffer::Sample() {
  const OccupancySample s{kernel_.Now(), size_, static_cast<int64_t>(ready_.size())};
  if (!occupancy_.empty() && occupancy_.back().time == s.time) {
    occupancy_.back() = s;
  } else {
    occupancy_.push_back(s);
  }
}

}  // namespace rollsim::buffer
