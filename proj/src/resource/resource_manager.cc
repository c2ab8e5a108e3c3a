// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/resource/resource_manager.h"

#include "rollsim/common/error.h"

namespace rollsim::resource {

const char *RoleName(WorkerRole role) {
  switch (role) {
    case WorkerRole::kTrain:
      return "train";
    case WorkerRole::kInference:
      return "inference";
    case WorkerRole::kEnvironment:
      return "environment";
    case WorkerRole::kReward:
      return "reward";
  }
  return "unknown";
}

const char *StatusName(WorkerStatus status) {
  switch (status) {
    case WorkerStatus::kAlive:
      return "alive";
    case WorkerStatus::kRestarting:
      return "restarting";
    case WorkerStatus::kRemoved:
      return "removed";
  }
  return "unknown";
}

int64_t ResourcePool::used() const {
  int64_t total = 0;
  for (const auto &[worker, n] : allocated) total += n;
  return total;
}

ResourceManager::ResourceManager(const std::vector<std::pair<std::string, int64_t>> &pools) {
  for (const auto &[label, capacity] : pools) AddPool(label, capacity);
}

void ResourceManager::AddPool(const std::string &label, int64_t capacity) {
  if (label.empty()) throw InvalidArgument("pool label must be non-empty");
  if (capacity < 0) throw InvalidArgument("pool '" + label + "': capacity must be >= 0");
  if (pool_index_.count(label)) throw InvalidArgument("duplicate pool label '" + label + "'");
  pool_index_[label] = pools_.size();
  pools_.push_back(ResourcePool{label, capacity, {}});
}

const ResourcePool &ResourceManager::pool(const std::string &label) const {
  auto it = pool_index_.find(label);
  if (it == pool_index_.end()) throw NotFound("unknown pool '" + label + "'");
  return pools_[it->second];
}

bool ResourceManager::HasPool(const std::string &label) const { return pool_index_.count(label) > 0; }

const WorkerBinding &ResourceManager::binding(const std::string &worker_id) const {
  auto it = bindings_.find(worker_id);
  if (it == bindings_.end()) throw NotFound("unknown worker '" + worker_id + "'");
  return it->second;
}

WorkerBinding &ResourceManager::MutableBinding(const std::string &worker_id) {
  auto it = bindings_.find(worker_id);
  if (it == bindings_.end()) throw NotFound("unknown worker '" + worker_id + "'");
  return it->second;
}

bool ResourceManager::HasWorker(const std::string &worker_id) const {
  return bindings_.count(worker_id) > 0;
}

bool ResourceManager::IsAlive(const std::string &worker_id) const {
  auto it = bindings_.find(worker_id);
  return it != bindings_.end() && it->second.status == WorkerStatus::kAlive;
}

std::vector<std::string> ResourceManager::pool_labels() const {
  std::vector<std::string> labels;
  for (const auto &p : pools_) labels.push_back(p.label);
  return labels;
}

void ResourceManager::Log(const std::string &worker_id, const char *event, const std::string &pool,
                          int64_t devices) {
  journal_.push_back(Transition{now_, worker_id, event, pool, devices});
}

const WorkerBinding &ResourceManager::Allocate(const std::string &worker_id, WorkerRole role,
                                               const std::string &pool_label, int64_t devices) {
  auto it = pool_index_.find(pool_label);
  if (it == pool_index_.end()) throw NotFound("allocate: unknown pool '" + pool_label + "'");
  if (devices < 0) throw InvalidArgument("allocate: device count must be >= 0");
  auto existing = bindings_.find(worker_id);
  if (existing != bindings_.end() && existing->second.status != WorkerStatus::kRemoved) {
    throw InvalidArgument("allocate: worker '" + worker_id + "' already bound");
  }
  ResourcePool &pool = pools_[it->second];
  const int64_t free = pool.free();
  if (devices > free) {
    throw CapacityError("allocate: pool '" + pool_label + "' has " + std::to_string(free) +
                            " free devices, requested " + std::to_string(devices),
                        free);
  }
  if (devices > 0) pool.allocated[worker_id] = devices;
  bindings_[worker_id] = WorkerBinding{worker_id, role, pool_label, devices, WorkerStatus::kAlive, 0};
  Log(worker_id, "allocate", pool_label, devices);
  return bindings_[worker_id];
}

void ResourceManager::Release(const std::string &worker_id) {
  WorkerBinding &b = MutableBinding(worker_id);
  if (b.status == WorkerStatus::kRemoved) return;
  pools_[pool_index_.at(b.pool_label)].allocated.erase(worker_id);
  b.status = WorkerStatus::kRemoved;
  Log(worker_id, "release", b.pool_label, b.device_count);
  b.device_count = 0;
  bindings_.erase(worker_id);
}

WorkerStatus ResourceManager::MarkFailed(const std::string &worker_id) {
  WorkerBinding &b = MutableBinding(worker_id);
  if (b.status == WorkerStatus::kRemoved) return b.status;
  ++b.consecutive_failures;
  Log(worker_id, "fail", b.pool_label, b.device_count);
  if (b.consecutive_failures >= 2) {
    pools_[pool_index_.at(b.pool_label)].allocated.erase(worker_id);
    b.status = WorkerStatus::kRemoved;
    Log(worker_id, "remove", b.pool_label, b.device_count);
    b.device_count = 0;
  } else {
    b.status = WorkerStatus::kRestarting;
  }
  return b.status;
}

WorkerStatus ResourceManager::Restart(const std::string &worker_id) {
  WorkerBinding &b = MutableBinding(worker_id);
  if (b.status == WorkerStatus::kRestarting) {
    b.status = WorkerStatus::kAlive;
    Log(worker_id, "restart", b.pool_label, b.device_count);
  }
  return b.status;
}

void ResourceManager::ReportHealthy(const std::string &worker_id) {
  WorkerBinding &b = MutableBinding(worker_id);
  if (b.status == WorkerStatus::kAlive && b.consecutive_failures > 0) {
    b.consecutive_failures = 0;
    Log(worker_id, "healthy", b.pool_label, b.device_count);
  }
}

nlohmann::json ResourceManager::Snapshot() const {
  nlohmann::json pools = nlohmann::json::array();
  for (const auto &p : pools_) {
    pools.push_back({{"label", p.label},
                     {"capacity", p.capacity},
                     {"allocated", p.used()},
                     {"free", p.free()}});
  }
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto &[id, b] : bindings_) {
    bindings.push_back({{"worker_id", id},
                        {"role", RoleName(b.role)},
                        {"pool", b.pool_label},
                        {"devices", b.device_count},
                        {"status", StatusName(b.status)}});
  }
  nlohmann::json transitions = nlohmann::json::array();
  for (const auto &t : journal_) {
    transitions.push_back({{"time", t.time},
                           {"worker_id", t.worker_id},
                           {"event", t.event},
                           {"pool", t.pool_label},
                           {"devices", t.devices}});
  }
  return {{"pools", pools}, {"bindings", bindings}, {"transitions", transitions}};
}

}  // namespace rollsim::resource
