// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rollsim/proxy/generation.h"
#include "rollsim/reward/reward_client.h"
#include "rollsim/rollout/trajectory.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/workload/link_model.h"

namespace rollsim::test {

/// Transfer table rows (sizes in GiB converted to bytes), keyed by link.
std::map<std::string, std::vector<workload::TransferSample>> TransferTableRows();

/// Least squares by Cramer's rule on raw sums: returns (intercept, slope).
std::pair<double, double> OlsOracle(const std::vector<workload::TransferSample> &samples);

/// A small valid scenario: one H800 rollout pool with `workers` single-GPU
/// workers, an 8-GPU trainer, one constant-latency task.
nlohmann::json SmallScenario(int workers = 4);

/// LLM double: every request completes its full target after `latency(req)`.
class FakeLlm : public proxy::LlmClient {
 public:
  using Latency = std::function<double(const proxy::GenerationRequest &)>;
  FakeLlm(sim::Kernel &kernel, Latency latency);

  void Submit(proxy::GenerationRequest request) override;
  void Abort(uint64_t request_id) override;

  int64_t submitted = 0;
  std::vector<uint64_t> aborted;

 private:
  sim::Kernel &kernel_;
  Latency latency_;
  sim::ActorId actor_;
  std::map<uint64_t, sim::EventId> pending_;
};

/// Reward double answering after a fixed latency.
class FakeReward : public reward::RewardClient {
 public:
  FakeReward(sim::Kernel &kernel, double latency, bool ok = true);
  void Invoke(reward::RewardRequest request) override;

  int64_t calls = 0;
  bool ok;

 private:
  sim::Kernel &kernel_;
  double latency_;
  sim::ActorId actor_;
};

/// A completed, rewarded trajectory for buffer tests.
rollout::Trajectory Completed(uint64_t trajectory_id, uint64_t group_id, uint64_t init_version,
                              int64_t tokens = 10);

}  // namespace rollsim::test
