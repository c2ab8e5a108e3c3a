// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rollsim/cluster/cluster.h"
#include "rollsim/proxy/generation.h"
#include "rollsim/proxy/inference_engine.h"
#include "rollsim/resource/resource_manager.h"
#include "rollsim/sim/kernel.h"

namespace rollsim::proxy {

struct InferenceWorkerSpec {
  std::string id;
  std::string pool;
  int64_t devices = 1;
  /// Engine parameters; `hw` is the per-device profile and gets scaled by
  /// `devices`.
  EngineConfig engine;
};

/// Gateway in front of the inference workers. Routes each request through
/// the cluster's hw_mapping "generate" method, relays ADD/ABORT commands,
/// runs the fleet-wide suspend/resume used by weight updates, and reroutes
/// the requests of failed workers.
class LlmProxy : public LlmClient {
 public:
  static constexpr const char *kGenerateMethod = "generate";

  LlmProxy(sim::Kernel &kernel, resource::ResourceManager &rm,
           const std::vector<InferenceWorkerSpec> &workers, cluster::AffinityTable affinity);

  /// Throws InvalidArgument for a duplicate request id or empty request.
  void Submit(GenerationRequest request) override;
  /// Idempotent; unknown ids are acknowledged as no-ops (returns normally).
  void Abort(uint64_t request_id) override;

  /// Halts every alive engine at its next step boundary, then calls
  /// `on_halted`. New submissions are held at the proxy until ResumeAll().
  void SuspendAll(std::function<void()> on_halted);
  void ResumeAll();
  bool suspended() const { return suspended_; }

  void SetVersion(uint64_t version);

  /// Scenario-injected failure. The first failure restarts the worker in
  /// place after `restart_delay`; a second one removes it. Requests it held
  /// are rerouted to healthy workers and restart their generation.
  void FailWorker(const std::string &worker_id, sim::SimTime restart_delay);

  cluster::Cluster &cluster() { return *cluster_; }
  const std::vector<InferenceEngine *> &engines() const { return engines_; }
  InferenceEngine *engine(const std::string &id) const;
  const std::vector<StepTraceRecord> &step_trace() const { return step_trace_; }
  void set_keep_step_trace(bool keep) { keep_step_trace_ = keep; }

  int64_t routed() const { return routed_; }
  int64_t fallbacks() const { return fallbacks_; }
  int64_t rerouted() const { return rerouted_; }
  /// Requests per (tag, pool) pair, for affinity audits.
  const std::map<std::pair<std::string, std::string>, int64_t> &routes() const { return routes_; }
  /// Earliest first decode step completed by any engine after its resume.
  std::optional<sim::SimTime> FirstDecodeAfterResume() const;

 private:
  struct InFlight {
    std::string worker;
    bool fallback = false;
  };

  void Route(GenerationRequest request);
  void OnTerminal(const GenerationRequest &request, GenerationResult result);
  void Reply(const GenerationRequest &request, GenerationResult result);

  sim::Kernel &kernel_;
  resource::ResourceManager &rm_;
  sim::ActorId actor_;
  std::unique_ptr<cluster::Cluster> cluster_;
  std::vector<InferenceEngine *> engines_;
  std::vector<StepTraceRecord> step_trace_;
  bool keep_step_trace_ = true;
  std::map<uint64_t, InFlight> in_flight_;
  std::set<uint64_t> seen_;
  std::deque<GenerationRequest> held_;
  bool suspended_ = false;
  int64_t routed_ = 0;
  int64_t fallbacks_ = 0;
  int64_t rerouted_ = 0;
  std::map<std::pair<std::string, std::string>, int64_t> routes_;
};

}  // namespace rollsim::proxy
