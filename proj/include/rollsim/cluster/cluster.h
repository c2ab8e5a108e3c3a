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

#include "json.hpp"
#include "rollsim/resource/resource_manager.h"
#include "rollsim/sim/kernel.h"

namespace rollsim::cluster {

enum class ExecutionMode { kExecuteAll, kHwMapping, kServerless };

const char *ModeName(ExecutionMode mode);

/// Tag -> pool label, with a mandatory "default" entry.
class AffinityTable {
 public:
  AffinityTable() = default;
  explicit AffinityTable(std::map<std::string, std::string> entries);

  /// Pool for `tag`, or the default pool for unknown tags.
  const std::string &Lookup(const std::string &tag) const;
  const std::string &default_pool() const { return entries_.at("default"); }
  const std::map<std::string, std::string> &entries() const { return entries_; }

  /// Throws NotFound if any label is missing from `rm`.
  void Validate(const resource::ResourceManager &rm) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// The worker side of a cluster. Subclasses expose admission state so that
/// hardware-affinity routing can tell whether a pool is saturated.
class Worker {
 public:
  explicit Worker(std::string id) : id_(std::move(id)) {}
  virtual ~Worker() = default;

  const std::string &id() const { return id_; }
  virtual bool HasAdmissionCapacity() const { return true; }
  virtual int64_t Outstanding() const { return 0; }

 private:
  std::string id_;
};

/// Outcome of one worker-local method invocation.
struct LocalOutcome {
  bool ok = true;
  sim::SimTime duration = 0.0;
  nlohmann::json output;
  std::string error;
};

using LocalMethod =
    std::function<LocalOutcome(Worker &worker, const nlohmann::json &input)>;

struct BroadcastResult {
  /// (worker id, output) for every worker that answered, in worker order.
  std::vector<std::pair<std::string, nlohmann::json>> results;
  /// Workers that failed during the call, in worker order.
  std::vector<std::string> failed;
  sim::SimTime started = 0.0;
  sim::SimTime finished = 0.0;

  bool ok() const { return failed.empty(); }
};

struct RouteDecision {
  std::string pool;
  std::vector<std::string> workers;
  bool fallback = false;
};

struct ServerlessResult {
  bool ok = true;
  nlohmann::json output;
  std::string error;
};

/// A pure-function backend reachable through an endpoint URL.
class ServerlessBackend {
 public:
  virtual ~ServerlessBackend() = default;
  virtual void Invoke(const nlohmann::json &input,
                      std::function<void(const ServerlessResult &)> done) = 0;
};

/// URL -> backend lookup shared by every cluster of a simulation.
class EndpointRegistry {
 public:
  void Register(const std::string &url, ServerlessBackend *backend);
  ServerlessBackend *Find(const std::string &url) const;

 private:
  std::map<std::string, ServerlessBackend *> backends_;
};

/// Accepts "<scheme>://<rest>" where scheme is alphanumeric (plus "+.-").
bool IsValidEndpoint(const std::string &url);

struct WorkerSpec {
  std::string id;
  std::string pool;
  int64_t devices = 1;
};

/// Proxy over a collection of workers sharing one role.
///
/// Each method is bound to exactly one execution mode: broadcast to every
/// alive worker (execute_all), route to the workers of the preferred pool
/// (hw_mapping), or forward to a serverless endpoint. The cluster is a
/// kernel actor; broadcast results arrive as callbacks.
class Cluster {
 public:
  using WorkerFactory = std::function<std::unique_ptr<Worker>(const WorkerSpec &)>;

  Cluster(sim::Kernel &kernel, resource::ResourceManager &rm, std::string name,
          resource::WorkerRole role, const std::vector<WorkerSpec> &specs,
          const WorkerFactory &factory);

  // Method table. Declared once at construction time by the owner.
  void RegisterExecuteAll(const std::string &method, LocalMethod impl);
  void RegisterHwMapping(const std::string &method, AffinityTable table);
  /// Rebinds `method` (unbound or locally bound) to a serverless endpoint.
  /// Re-registration replaces the previous endpoint.
  void RegisterServerless(const std::string &method, const std::string &endpoint,
                          EndpointRegistry *registry);

  ExecutionMode mode(const std::string &method) const;
  bool HasMethod(const std::string &method) const { return methods_.count(method) > 0; }

  /// Invokes `method` on every alive worker and reports once all answered.
  /// Calls on the same cluster are serialized.
  void ExecuteAll(const std::string &method, const nlohmann::json &input,
                  std::function<void(const BroadcastResult &)> done);

  /// Workers of the preferred pool if any has admission capacity, else the
  /// default pool's. Throws RoutingError when no pool has an alive worker.
  RouteDecision RouteByAffinity(const std::string &method, const std::string &tag) const;
  /// Least-outstanding worker of RouteByAffinity, ties to the lowest index.
  std::pair<Worker *, RouteDecision> SelectWorker(const std::string &method,
                                                  const std::string &tag) const;

  /// Fire-and-forget call to a serverless-bound method.
  void InvokeServerless(const std::string &method, const nlohmann::json &input,
                        std::function<void(const ServerlessResult &)> done);

  const std::string &name() const { return name_; }
  sim::ActorId actor() const { return actor_; }
  size_t size() const { return workers_.size(); }
  Worker &worker(size_t i) { return *workers_[i]; }
  const Worker &worker(size_t i) const { return *workers_[i]; }
  Worker *FindWorker(const std::string &id);
  const std::string &pool_of(const std::string &worker_id) const;
  std::vector<std::string> AliveWorkers() const;
  bool IsAlive(const std::string &worker_id) const { return rm_.IsAlive(worker_id); }

 private:
  struct Method {
    ExecutionMode mode;
    LocalMethod local;
    AffinityTable affinity;
    std::string endpoint;
    EndpointRegistry *registry = nullptr;
  };
  struct PendingBroadcast {
    std::string method;
    nlohmann::json input;
    std::function<void(const BroadcastResult &)> done;
  };

  const Method &FindMethod(const std::string &method) const;
  void StartNextBroadcast();
  std::vector<size_t> AliveInPool(const std::string &pool) const;

  sim::Kernel &kernel_;
  resource::ResourceManager &rm_;
  std::string name_;
  resource::WorkerRole role_;
  sim::ActorId actor_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::string> worker_pools_;
  std::map<std::string, Method> methods_;
  std::deque<PendingBroadcast> broadcasts_;
  bool broadcast_active_ = false;
};

}  // namespace rollsim::cluster
