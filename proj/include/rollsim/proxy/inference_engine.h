// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/cluster/cluster.h"
#include "rollsim/metrics/utilization.h"
#include "rollsim/proxy/generation.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/model_spec.h"

namespace rollsim::proxy {

enum class StepKind { kPrefill, kDecode, kRecompute };

const char *StepKindName(StepKind kind);

/// One row of the per-worker step trace. A decode row may cover several
/// consecutive identical steps (`steps` > 1) when nothing changed between
/// them.
struct StepTraceRecord {
  sim::SimTime time;
  std::string worker;
  StepKind kind;
  int64_t batch_size;
  int64_t tokens;
  double kv_used;
  int64_t steps;
  sim::SimTime duration;
  uint64_t version;
};

struct EngineConfig {
  workload::ModelSpec model;
  /// Aggregate profile of the worker's devices.
  workload::HardwareProfile hw;
  int64_t chunk_size = 512;
  int64_t max_running = 256;
  double prefix_discount = 1.0;
};

struct Command {
  enum class Kind { kAdd, kAbort, kSuspend, kResume };
  Kind kind;
  GenerationRequest request;  // kAdd
  uint64_t request_id = 0;    // kAbort
  std::function<void()> ack;  // kSuspend: fired once the engine is halted
};

/// Command-driven continuous-batching loop of one inference worker.
///
/// Each step first drains pending commands, then admits waiting requests in
/// FIFO order while the KV budget allows, then runs recompute, a prefill
/// chunk, or a decode step for the whole resident batch. Requests reserve
/// KV for context + target tokens at admission and are never preempted.
/// Identical decode steps are coalesced into one kernel event that is cut
/// back to the next step boundary whenever a command arrives, so the
/// observable timeline equals one-event-per-step execution.
class InferenceEngine : public cluster::Worker {
 public:
  /// Receives every request leaving the engine (completed, aborted, failed).
  using TerminalSink = std::function<void(const GenerationRequest &, GenerationResult)>;

  InferenceEngine(sim::Kernel &kernel, std::string id, EngineConfig config, TerminalSink sink,
                  std::vector<StepTraceRecord> *step_trace = nullptr);

  /// Delivers a command as a kernel event at the current time.
  void Deliver(Command command);

  bool HasAdmissionCapacity() const override;
  int64_t Outstanding() const override;

  /// Drops every request held by the engine and returns them; the engine
  /// stays halted until Revive().
  std::vector<GenerationRequest> Fail();
  void Revive();

  void SetVersion(uint64_t version) { version_ = version; }
  uint64_t version() const { return version_; }
  bool suspended() const { return suspended_; }
  bool busy() const { return step_event_.has_value(); }
  bool alive() const { return alive_; }
  double kv_used() const { return kv_used_; }
  double kv_budget() const { return kv_budget_; }
  size_t resident_count() const { return resident_.size(); }
  size_t waiting_count() const { return waiting_.size(); }
  const EngineConfig &config() const { return config_; }
  const metrics::BusyTimeline &busy_timeline() const { return busy_; }
  sim::ActorId actor() const { return actor_; }
  /// Time the first decode step ended after the latest resume, if any.
  std::optional<sim::SimTime> first_decode_after_resume() const { return first_decode_after_resume_; }

 private:
  struct Slot {
    GenerationRequest request;
    int64_t prefilled = 0;
    int64_t decoded = 0;
    int64_t recompute_pending = 0;
    int64_t recompute_total = 0;
    double kv_reserved = 0.0;
    sim::SimTime submit_time = 0.0;
    uint64_t first_version = 0;
  };
  struct ActiveStep {
    StepKind kind;
    sim::SimTime start;
    sim::SimTime per_step;
    int64_t steps;
    int64_t batch;
    /// Tokens assigned to each resident slot by a prefill chunk.
    std::vector<std::pair<uint64_t, int64_t>> chunk;
    int64_t tokens;
  };

  void OnCommand(Command command);
  void Drain();
  void Apply(Command &command);
  void Admit();
  void MaybeStartStep();
  void FinishStep();
  void Truncate();
  void Finish(Slot slot, GenerationStatus status, const std::string &error = {});
  double Footprint(const GenerationRequest &r) const;

  sim::Kernel &kernel_;
  EngineConfig config_;
  TerminalSink sink_;
  std::vector<StepTraceRecord> *step_trace_;
  sim::ActorId actor_;
  double kv_budget_;
  double kv_used_ = 0.0;
  std::deque<Slot> waiting_;
  std::vector<Slot> resident_;  // admission order
  std::deque<Command> pending_;
  int64_t inbound_ = 0;
  std::optional<sim::EventId> step_event_;
  std::optional<ActiveStep> active_;
  bool suspended_ = false;
  bool suspend_requested_ = false;
  bool alive_ = true;
  uint64_t version_ = 0;
  std::optional<sim::SimTime> resumed_at_;
  std::optional<sim::SimTime> first_decode_after_resume_;
  metrics::BusyTimeline busy_;
};

}  // namespace rollsim::proxy
