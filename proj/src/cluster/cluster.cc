// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/cluster/cluster.h"

#include <optional>
#include <regex>

#include "rollsim/common/error.h"

namespace rollsim::cluster {

const char *ModeName(ExecutionMode mode) {
  switch (mode) {
    case ExecutionMode::kExecuteAll:
      return "execute_all";
    case ExecutionMode::kHwMapping:
      return "hw_mapping";
    case ExecutionMode::kServerless:
      return "serverless";
  }
  return "unknown";
}

AffinityTable::AffinityTable(std::map<std::string, std::string> entries)
    : entries_(std::move(entries)) {
  if (!entries_.count("default")) {
    throw InvalidArgument("affinity table requires a \"default\" entry");
  }
}

const std::string &AffinityTable::Lookup(const std::string &tag) const {
  auto it = entries_.find(tag);
  return it == entries_.end() ? entries_.at("default") : it->second;
}

void AffinityTable::Validate(const resource::ResourceManager &rm) const {
  for (const auto &[tag, label] : entries_) {
    if (!rm.HasPool(label)) {
      throw NotFound("affinity table maps '" + tag + "' to unknown pool '" + label + "'");
    }
  }
}

void EndpointRegistry::Register(const std::string &url, ServerlessBackend *backend) {
  if (!IsValidEndpoint(url)) throw InvalidArgument("malformed endpoint '" + url + "'");
  backends_[url] = backend;
}

ServerlessBackend *EndpointRegistry::Find(const std::string &url) const {
  auto it = backends_.find(url);
  return it == backends_.end() ? nullptr : it->second;
}

bool IsValidEndpoint(const std::string &url) {
  static const std::regex kPattern(R"(^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/][^\s]*$)");
  return std::regex_match(url, kPattern);
}

Cluster::Cluster(sim::Kernel &kernel, resource::ResourceManager &rm, std::string name,
                 resource::WorkerRole role, const std::vector<WorkerSpec> &specs,
                 const WorkerFactory &factory)
    : kernel_(kernel), rm_(rm), name_(std::move(name)), role_(role) {
  actor_ = kernel_.RegisterActor("cluster/" + name_);
  for (const auto &spec : specs) {
    rm_.Allocate(spec.id, role_, spec.pool, spec.devices);
    workers_.push_back(factory(spec));
    worker_pools_.push_back(spec.pool);
  }
}

void Cluster::RegisterExecuteAll(const std::string &method, LocalMethod impl) {
  if (!impl) throw InvalidArgument("execute_all method '" + method + "' needs an implementation");
  methods_[method] = Method{ExecutionMode::kExecuteAll, std::move(impl), {}, {}, nullptr};
}

void Cluster::RegisterHwMapping(const std::string &method, AffinityTable table) {
  table.Validate(rm_);
  methods_[method] = Method{ExecutionMode::kHwMapping, {}, std::move(table), {}, nullptr};
}

void Cluster::RegisterServerless(const std::string &method, const std::string &endpoint,
                                 EndpointRegistry *registry) {
  if (!IsValidEndpoint(endpoint)) {
    throw InvalidArgument("register_serverless: malformed endpoint '" + endpoint + "'");
  }
  auto it = methods_.find(method);
  if (it != methods_.end() && it->second.mode == ExecutionMode::kHwMapping) {
    throw StateError("register_serverless: '" + method + "' is bound to hw_mapping");
  }
  methods_[method] = Method{ExecutionMode::kServerless, {}, {}, endpoint, registry};
}

const Cluster::Method &Cluster::FindMethod(const std::string &method) const {
  auto it = methods_.find(method);
  if (it == methods_.end()) {
    throw DispatchError("cluster '" + name_ + "': method '" + method + "' is not registered");
  }
  return it->second;
}

ExecutionMode Cluster::mode(const std::string &method) const { return FindMethod(method).mode; }

Worker *Cluster::FindWorker(const std::string &id) {
  for (auto &w : workers_) {
    if (w->id() == id) return w.get();
  }
  return nullptr;
}

const std::string &Cluster::pool_of(const std::string &worker_id) const {
  for (size_t i = 0; i < workers_.size(); ++i) {
    if (workers_[i]->id() == worker_id) return worker_pools_[i];
  }
  throw NotFound("cluster '" + name_ + "': unknown worker '" + worker_id + "'");
}

std::vector<std::string> Cluster::AliveWorkers() const {
  std::vector<std::string> ids;
  for (const auto &w : workers_) {
    if (rm_.IsAlive(w->id())) ids.push_back(w->id());
  }
  return ids;
}

void Cluster::ExecuteAll(const std::string &method, const nlohmann::json &input,
                         std::function<void(const BroadcastResult &)> done) {
  const Method &m = FindMethod(method);
  if (m.mode != ExecutionMode::kExecuteAll) {
    throw DispatchError("cluster '" + name_ + "': '" + method + "' is bound to " +
                        ModeName(m.mode) + ", not execute_all");
  }
  broadcasts_.push_back(PendingBroadcast{method, input, std::move(done)});
  if (!broadcast_active_) StartNextBroadcast();
}

void Cluster::StartNextBroadcast() {
  if (broadcasts_.empty()) {
    broadcast_active_ = false;
    return;
  }
  broadcast_active_ = true;
  auto call = std::make_shared<PendingBroadcast>(std::move(broadcasts_.front()));
  broadcasts_.pop_front();
  const Method &m = FindMethod(call->method);

  struct Gather {
    BroadcastResult result;
    std::vector<std::optional<nlohmann::json>> outputs;
    std::vector<bool> failed;
    std::vector<std::string> ids;
    size_t remaining = 0;
  };
  auto gather = std::make_shared<Gather>();
  gather->result.started = kernel_.Now();
  for (const auto &w : workers_) {
    if (rm_.IsAlive(w->id())) gather->ids.push_back(w->id());
  }
  gather->outputs.resize(gather->ids.size());
  gather->failed.resize(gather->ids.size(), false);
  gather->remaining = gather->ids.size();

  auto finish = [this, gather, call]() {
    for (size_t i = 0; i < gather->ids.size(); ++i) {
      if (gather->failed[i]) {
        gather->result.failed.push_back(gather->ids[i]);
      } else {
        gather->result.results.emplace_back(gather->ids[i], *gather->outputs[i]);
      }
    }
    gather->result.finished = kernel_.Now();
    call->done(gather->result);
    StartNextBroadcast();
  };

  if (gather->ids.empty()) {
    kernel_.Schedule(0.0, actor_, "broadcast_done", finish, call->method + " workers=0");
    return;
  }
  for (size_t i = 0; i < gather->ids.size(); ++i) {
    Worker *w = FindWorker(gather->ids[i]);
    LocalOutcome outcome;
    try {
      outcome = m.local(*w, call->input);
    } catch (const std::exception &e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
    const sim::SimTime delay = sim::IsValidDuration(outcome.duration) ? outcome.duration : 0.0;
    kernel_.Schedule(
        delay, actor_, outcome.ok ? "broadcast_reply" : "broadcast_failure",
        [gather, i, outcome, finish]() {
          if (outcome.ok) {
            gather->outputs[i] = outcome.output;
          } else {
            gather->failed[i] = true;
          }
          if (--gather->remaining == 0) finish();
        },
        call->method + " worker=" + gather->ids[i]);
  }
}

std::vector<size_t> Cluster::AliveInPool(const std::string &pool) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < workers_.size(); ++i) {
    if (worker_pools_[i] == pool && rm_.IsAlive(workers_[i]->id())) out.push_back(i);
  }
  return out;
}

RouteDecision Cluster::RouteByAffinity(const std::string &method, const std::string &tag) const {
  const Method &m = FindMethod(method);
  if (m.mode != ExecutionMode::kHwMapping) {
    throw DispatchError("cluster '" + name_ + "': '" + method + "' is bound to " +
                        ModeName(m.mode) + ", not hw_mapping");
  }
  const std::string &preferred = m.affinity.Lookup(tag);
  const std::string &fallback = m.affinity.default_pool();

  auto with_capacity = [this](const std::vector<size_t> &idx) {
    std::vector<std::string> ids;
    for (size_t i : idx) {
      if (workers_[i]->HasAdmissionCapacity()) ids.push_back(workers_[i]->id());
    }
    return ids;
  };
  auto all_ids = [this](const std::vector<size_t> &idx) {
    std::vector<std::string> ids;
    for (size_t i : idx) ids.push_back(workers_[i]->id());
    return ids;
  };

  const auto pref_alive = AliveInPool(preferred);
  if (auto ids = with_capacity(pref_alive); !ids.empty()) {
    return RouteDecision{preferred, std::move(ids), false};
  }
  const bool distinct = fallback != preferred;
  const auto def_alive = distinct ? AliveInPool(fallback) : std::vector<size_t>{};
  if (auto ids = with_capacity(def_alive); !ids.empty()) {
    return RouteDecision{fallback, std::move(ids), true};
  }
  // Every pool is saturated: queue on the preferred pool if it is alive.
  if (!pref_alive.empty()) return RouteDecision{preferred, all_ids(pref_alive), false};
  if (!def_alive.empty()) return RouteDecision{fallback, all_ids(def_alive), true};
  throw RoutingError("cluster '" + name_ + "': no alive worker for tag '" + tag + "'");
}

std::pair<Worker *, RouteDecision> Cluster::SelectWorker(const std::string &method,
                                                         const std::string &tag) const {
  RouteDecision decision = RouteByAffinity(method, tag);
  Worker *best = nullptr;
  for (const auto &id : decision.workers) {
    for (const auto &w : workers_) {
      if (w->id() != id) continue;
      if (best == nullptr || w->Outstanding() < best->Outstanding()) best = w.get();
    }
  }
  return {best, std::move(decision)};
}

void Cluster::InvokeServerless(const std::string &method, const nlohmann::json &input,
                               std::function<void(const ServerlessResult &)> done) {
  const Method &m = FindMethod(method);
  if (m.mode != ExecutionMode::kServerless) {
    throw DispatchError("cluster '" + name_ + "': '" + method + "' is not bound to serverless");
  }
  ServerlessBackend *backend = m.registry ? m.registry->Find(m.endpoint) : nullptr;
  if (backend == nullptr) {
    throw DispatchError("cluster '" + name_ + "': no backend serves endpoint '" + m.endpoint + "'");
  }
  backend->Invoke(input, std::move(done));
}

}  // namespace rollsim::cluster
