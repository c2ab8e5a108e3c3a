// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rollsim/cluster/cluster.h"
#include "rollsim/reward/reward_service.h"
#include "rollsim/rollout/rollout_scheduler.h"
#include "rollsim/train/pipeline.h"
#include "rollsim/train/weight_sync.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/link_model.h"
#include "rollsim/workload/model_spec.h"

namespace rollsim::scenario {

struct PoolSpec {
  std::string label;
  /// Empty for CPU pools.
  std::string hardware;
  int64_t devices = 0;
};

struct WorkerGroupSpec {
  std::string pool;
  int64_t count = 1;
  int64_t devices_per_worker = 1;
  std::string link;
};

struct InferenceSpec {
  std::vector<WorkerGroupSpec> workers;
  int64_t chunk_size = 512;
  int64_t max_running = 256;
  double mfu = workload::kDefaultMfu;
  double mbu = workload::kDefaultMbu;
  double prefix_discount = 1.0;
  std::map<std::string, std::string> affinity;
};

struct TrainingSpec {
  std::string pool;
  train::ParadigmSpec paradigm;
  int64_t checkpoint_interval = 1;
  bool background_publication = true;
  double mfu = workload::kDefaultMfu;
};

struct RewardSpec {
  reward::RewardServiceConfig service;
  /// Dedicated mode: pool whose devices are reserved for reward serving.
  std::string pool;
  std::string endpoint = "fc://reward/compute";
  std::string hardware = "H800";
};

struct InferenceFailure {
  std::string worker;
  sim::SimTime time = 0.0;
  sim::SimTime restart_delay = 30.0;
};

/// Fully resolved scenario. Build it with Parse(); every label resolves.
struct Scenario {
  std::string name;
  uint64_t seed = 0;
  int64_t steps = 1;
  workload::ModelSpec model;
  std::map<std::string, workload::HardwareProfile> hardware;
  std::vector<PoolSpec> pools;
  TrainingSpec training;
  InferenceSpec inference;
  rollout::RolloutConfig rollout;
  int64_t groups = 1;
  int64_t max_inflight_groups = 0;
  bool finish_then_reject = false;
  std::string cpu_pool;
  RewardSpec reward;
  std::map<std::string, workload::LinkModel> links;
  std::vector<InferenceFailure> inference_failures;
  std::vector<train::TrainerFailure> trainer_failures;
  std::vector<train::StoreOutage> store_outages;
  sim::SimTime store_backoff = 1.0;
  bool full_trace = false;
  /// Document the scenario was parsed from, with defaults left implicit.
  nlohmann::json source;

  /// Throws ValidationError listing every problem with a field path.
  static Scenario Parse(const nlohmann::json &doc);

  const PoolSpec &pool(const std::string &label) const;
  workload::HardwareProfile PoolHardware(const std::string &label) const;
};

/// Reads a scenario file, or a preset name resolved against the preset
/// directory ("<dir>/<name>.json").
nlohmann::json LoadScenarioJson(const std::string &path_or_preset);
std::filesystem::path PresetDirectory();
std::vector<std::string> PresetNames();

/// 16 hex digits of FNV-1a over the canonical (sorted-key) serialization.
std::string ScenarioHash(const nlohmann::json &doc);

/// Latency distribution from its JSON form, e.g. {"constant": 2},
/// {"gaussian": {"mean": 10, "stddev": 3}}, {"lognormal_tail": {"median": 4,
/// "p99_over_p50": 8}}, optionally with "failure_prob"/"failure_penalty".
sim::LatencyDistribution ParseLatency(const nlohmann::json &j);
/// Integer distribution from a number, {"uniform": [lo, hi]} or
/// {"empirical": [...]}.
sim::IntDistribution ParseIntDist(const nlohmann::json &j);

}  // namespace rollsim::scenario
