// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rollsim/sim/time.h"

namespace rollsim::resource {

enum class WorkerRole { kTrain, kInference, kEnvironment, kReward };
enum class WorkerStatus { kAlive, kRestarting, kRemoved };

const char *RoleName(WorkerRole role);
const char *StatusName(WorkerStatus status);

struct ResourcePool {
  std::string label;
  int64_t capacity = 0;
  std::map<std::string, int64_t> allocated;  // worker id -> devices

  int64_t used() const;
  int64_t free() const { return capacity - used(); }
};

struct WorkerBinding {
  std::string worker_id;
  WorkerRole role = WorkerRole::kInference;
  std::string pool_label;
  int64_t device_count = 0;
  WorkerStatus status = WorkerStatus::kAlive;
  /// Failures since the last time the worker was reported healthy.
  int consecutive_failures = 0;
};

/// One entry of the append-only metadata journal.
struct Transition {
  sim::SimTime time;
  std::string worker_id;
  std::string event;  // "allocate", "release", "fail", "restart", "remove", "healthy"
  std::string pool_label;
  int64_t devices;
};

/// Owns the heterogeneous pools and every worker binding.
///
/// Failure policy: the first failure puts a worker into kRestarting while it
/// keeps its devices (restart in place on the same GPUs); a second failure
/// before the worker is reported healthy removes it and returns its devices.
class ResourceManager {
 public:
  ResourceManager() = default;
  /// Pools in declaration order; duplicate labels or negative counts throw.
  explicit ResourceManager(const std::vector<std::pair<std::string, int64_t>> &pools);

  void AddPool(const std::string &label, int64_t capacity);

  /// Throws NotFound for an unknown pool, CapacityError (carrying the free
  /// count) when the pool is short, InvalidArgument for a duplicate id.
  const WorkerBinding &Allocate(const std::string &worker_id, WorkerRole role,
                                const std::string &pool_label, int64_t devices);
  void Release(const std::string &worker_id);

  WorkerStatus MarkFailed(const std::string &worker_id);
  WorkerStatus Restart(const std::string &worker_id);
  void ReportHealthy(const std::string &worker_id);

  const ResourcePool &pool(const std::string &label) const;
  bool HasPool(const std::string &label) const;
  const WorkerBinding &binding(const std::string &worker_id) const;
  bool HasWorker(const std::string &worker_id) const;
  bool IsAlive(const std::string &worker_id) const;

  std::vector<std::string> pool_labels() const;
  const std::vector<Transition> &journal() const { return journal_; }

  /// {pools, bindings, transitions} as a JSON document.
  nlohmann::json Snapshot() const;

  /// Timestamps journal entries; the owner updates it from the kernel clock.
  void SetClock(sim::SimTime now) { now_ = now; }

 private:
  WorkerBinding &MutableBinding(const std::string &worker_id);
  void Log(const std::string &worker_id, const char *event, const std::string &pool, int64_t devices);

  std::vector<ResourcePool> pools_;
  std::map<std::string, size_t> pool_index_;
  std::map<std::string, WorkerBinding> bindings_;
  std::vector<Transition> journal_;
  sim::SimTime now_ = 0.0;
};

}  // namespace rollsim::resource
