// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/buffer/sample_buffer.h"
#include "rollsim/metrics/utilization.h"
#include "rollsim/rollout/rollout_scheduler.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/train/weight_sync.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/model_spec.h"

namespace rollsim::train {

enum class Paradigm { kSynchronous, kOneOff, kAsync };

struct ParadigmSpec {
  Paradigm kind = Paradigm::kSynchronous;
  uint64_t alpha = 0;

  /// Staleness bound the buffer enforces for this paradigm.
  uint64_t BufferAlpha() const;
  std::string ToString() const;
  /// "sync", "one_off", "async" (with `alpha`) or "async:<alpha>". An
  /// asynchronous bound of zero is the synchronous paradigm.
  static ParadigmSpec Parse(const std::string &text, uint64_t alpha = 1);
};

struct TrainerFailure {
  /// Step during whose train_step the trainer crashes.
  int64_t step = 0;
  sim::SimTime restart_delay = 30.0;
};

struct TrainerConfig {
  workload::ModelSpec model;
  std::vector<workload::HardwareProfile> devices;
  ParadigmSpec paradigm;
  int64_t steps = 1;
  int64_t groups_per_batch = 1;
  int64_t group_size = 8;
  /// Versions between checkpoints.
  int64_t checkpoint_interval = 1;
  bool background_publication = true;
  /// Cap on concurrently running groups under group-level launching;
  /// 0 means one batch worth of groups.
  int64_t max_inflight_groups = 0;
  /// Let in-flight trajectories that became stale finish and be rejected by
  /// the buffer instead of aborting them at the version advance.
  bool finish_then_reject = false;
  std::vector<TrainerFailure> failures;

  void Validate() const;
};

/// Control surface of the inference fleet used by the sync protocol.
struct FleetHooks {
  std::function<void(std::function<void()> on_halted)> suspend_all;
  std::function<void()> resume_all;
  std::function<void(uint64_t version)> set_version;
  /// Earliest decode step completed since the last resume, if any.
  std::function<std::optional<sim::SimTime>()> first_token_after_resume;
};

struct PhaseReport {
  int64_t step = 0;
  /// Trainer version after this step.
  uint64_t version = 0;
  /// Version served by inference when the step ended.
  uint64_t deployed_version = 0;
  sim::SimTime start = 0.0;
  sim::SimTime end = 0.0;
  sim::SimTime step_time = 0.0;
  sim::SimTime get_batch_stall = 0.0;
  sim::SimTime train_compute = 0.0;
  sim::SimTime recovery = 0.0;
  /// Suspend command to resume: drain + store retry + transfer residual +
  /// broadcast.
  sim::SimTime suspend_window = 0.0;
  sim::SimTime drain = 0.0;
  sim::SimTime store_retry = 0.0;
  sim::SimTime transfer_residual = 0.0;
  sim::SimTime broadcast = 0.0;
  sim::SimTime full_transfer = 0.0;
  double publication_completed_fraction = 0.0;
  bool synced = false;
  std::optional<sim::SimTime> resume_to_first_token;
  sim::SimTime idle = 0.0;
  /// Batch ready time minus the earliest launch among its groups.
  sim::SimTime rollout_time = 0.0;
  int64_t trajectories = 0;
  int64_t prompt_tokens = 0;
  int64_t response_tokens = 0;
  int64_t stale_aborts = 0;
  int64_t wasted_tokens = 0;
  /// Largest n - init_version among the consumed trajectories.
  uint64_t max_staleness = 0;
};

/// One bar of the per-step Gantt chart.
struct PhaseSpan {
  int64_t step;
  std::string phase;
  sim::SimTime start;
  sim::SimTime end;
};

/// Training-side driver: get_batch, train_step, version advance, weight
/// publication and the suspend -> model_update -> resume protocol.
///
/// Launch policy by paradigm:
///  - synchronous: one batch per step, launched after the previous weights
///    were distributed; the update runs right after train_step.
///  - one_off: the next batch is launched as soon as the current one was
///    collected and the latest weights deployed, so it overlaps train_step.
///  - async: groups launch continuously, with the deployed version, while
///    fewer than max_inflight_groups are running or complete but not yet
///    consumed. alpha only bounds the staleness of what reaches the trainer.
class Pipeline {
 public:
  Pipeline(sim::Kernel &kernel, TrainerConfig config, rollout::RolloutScheduler &rollout,
           buffer::SampleBuffer &buffer, WeightStore &store, FleetHooks fleet);

  /// Only before Start().
  void SetParadigm(ParadigmSpec paradigm);
  void Start();

  /// Fills resume_to_first_token for the latest resume if the fleet has
  /// produced a token since. Called by the owner after the run.
  void CaptureFirstToken();

  bool finished() const { return finished_; }
  bool started() const { return started_; }
  uint64_t version() const { return version_; }
  uint64_t deployed_version() const { return deployed_; }
  const std::vector<PhaseReport> &reports() const { return reports_; }
  /// (version, time its distribution completed) in order.
  const std::vector<std::pair<uint64_t, sim::SimTime>> &distributions() const {
    return distributions_;
  }
  const std::vector<PhaseSpan> &spans() const { return spans_; }
  const metrics::BusyTimeline &train_busy() const { return train_busy_; }
  const TrainerConfig &config() const { return config_; }
  sim::ActorId actor() const { return actor_; }

 private:
  void BeginStep();
  void OnBatch(std::vector<rollout::Trajectory> batch);
  void TrainThen(std::function<void()> next);
  void AdvanceVersion();
  void ModelUpdate(uint64_t version, std::function<void()> next);
  void EndStep();
  void TopUp();
  void OnGroupSettled(const rollout::RolloutScheduler::GroupInfo &g, bool ok);
  sim::SimTime TrainTime(int64_t tokens) const;
  int64_t batch_size() const { return config_.groups_per_batch * config_.group_size; }

  sim::Kernel &kernel_;
  TrainerConfig config_;
  rollout::RolloutScheduler &rollout_;
  buffer::SampleBuffer &buffer_;
  WeightStore &store_;
  FleetHooks fleet_;
  sim::ActorId actor_;

  bool started_ = false;
  bool finished_ = false;
  uint64_t version_ = 0;
  uint64_t deployed_ = 0;
  int64_t step_ = 0;
  int64_t max_inflight_ = 0;
  sim::SimTime last_resume_ = -1.0;
  /// Step whose report owns the latest resume.
  int64_t resume_owner_ = -1;
  PhaseReport current_;
  int64_t stale_base_ = 0;
  int64_t wasted_base_ = 0;
  std::vector<PhaseReport> reports_;
  std::vector<std::pair<uint64_t, sim::SimTime>> distributions_;
  std::vector<PhaseSpan> spans_;
  metrics::BusyTimeline train_busy_;
};

}  // namespace rollsim::train
