// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "rollsim/buffer/sample_buffer.h"
#include "rollsim/metrics/metrics.h"
#include "rollsim/proxy/llm_proxy.h"
#include "rollsim/resource/resource_manager.h"
#include "rollsim/reward/reward_service.h"
#include "rollsim/rollout/rollout_scheduler.h"
#include "rollsim/scenario/scenario.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/train/pipeline.h"
#include "rollsim/train/weight_sync.h"

namespace rollsim::scenario {

struct RunOptions {
  /// Keep every trace record (needed for the timeline export).
  bool full_trace = false;
  bool keep_trajectories = true;
  bool keep_step_trace = false;
};

struct RunResult {
  std::string scenario_name;
  std::string scenario_hash;
  uint64_t seed = 0;
  std::string paradigm;
  std::vector<metrics::StepReport> reports;
  /// Pools with a utilization column, in column order.
  std::vector<std::string> util_pools;
  /// Busy fraction over the whole run per pool.
  std::map<std::string, double> run_utilization;
  uint64_t trace_digest = 0;
  uint64_t events = 0;
  double makespan = 0.0;
  std::vector<sim::TraceRecord> trace;
  std::vector<train::PhaseSpan> spans;
  std::vector<rollout::Trajectory> trajectories;
  std::vector<buffer::ConsumedRecord> consumption;
  std::vector<buffer::OccupancySample> occupancy;
  std::vector<reward::InstanceSample> reward_series;
  std::vector<proxy::StepTraceRecord> step_trace;
  std::vector<std::pair<uint64_t, sim::SimTime>> distributions;
  rollout::RolloutScheduler::Stats rollout_stats;
  int64_t buffer_stale_rejects = 0;
  int64_t buffer_evictions = 0;
  uint64_t alpha = 0;
  /// Seconds summed over completed trajectories: env_reset, generation,
  /// env_step, reward; plus training from the step reports.
  std::map<std::string, double> phase_totals;

  nlohmann::json Manifest() const;
  std::string StepCsv() const;
};

/// One self-contained run: kernel, resources, inference fleet, rollout,
/// buffer, reward service and trainer built from a scenario.
class Simulation {
 public:
  explicit Simulation(const Scenario &scenario, RunOptions options = {});
  ~Simulation();

  /// Runs until the trainer finished all steps. Throws StateError with a
  /// diagnostic when the run can no longer make progress.
  RunResult Run();

  sim::Kernel &kernel() { return *kernel_; }
  resource::ResourceManager &resources() { return rm_; }
  proxy::LlmProxy &proxy() { return *proxy_; }
  rollout::RolloutScheduler &rollout() { return *rollout_; }
  buffer::SampleBuffer &buffer() { return *buffer_; }
  train::Pipeline &pipeline() { return *pipeline_; }
  reward::RewardService &reward() { return *reward_; }

 private:
  class ServerlessRewardClient;

  Scenario scenario_;
  RunOptions options_;
  std::unique_ptr<sim::Kernel> kernel_;
  resource::ResourceManager rm_;
  std::unique_ptr<proxy::LlmProxy> proxy_;
  std::unique_ptr<reward::RewardService> reward_;
  cluster::EndpointRegistry endpoints_;
  std::unique_ptr<cluster::Cluster> reward_cluster_;
  std::unique_ptr<reward::RewardClient> reward_client_;
  std::unique_ptr<rollout::RolloutScheduler> rollout_;
  std::unique_ptr<buffer::SampleBuffer> buffer_;
  std::unique_ptr<train::WeightStore> store_;
  std::unique_ptr<train::Pipeline> pipeline_;
  bool ran_ = false;
};

/// Parses and runs `doc` with the given seed override (if any).
RunResult RunScenario(const nlohmann::json &doc, RunOptions options = {});

/// Writes steps.csv, phases.csv, trajectories.jsonl, occupancy.csv,
/// reward_instances.csv, manifest.json and, with a full trace,
/// timeline.jsonl into `dir`.
void WriteArtifacts(const RunResult &result, const std::filesystem::path &dir);

}  // namespace rollsim::scenario
