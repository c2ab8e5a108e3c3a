// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/train/pipeline.h"

#include <algorithm>
#include <limits>
#include <memory>

#include "rollsim/common/error.h"
#include "rollsim/workload/perf_model.h"

namespace rollsim::train {

uint64_t ParadigmSpec::BufferAlpha() const {
  switch (kind) {
    case Paradigm::kSynchronous:
      return 0;
    case Paradigm::kOneOff:
      return 1;
    case Paradigm::kAsync:
      return alpha;
  }
  return 0;
}

std::string ParadigmSpec::ToString() const {
  switch (kind) {
    case Paradigm::kSynchronous:
      return "sync";
    case Paradigm::kOneOff:
      return "one_off";
    case Paradigm::kAsync:
      return "async:" + std::to_string(alpha);
  }
  return "?";
}

ParadigmSpec ParadigmSpec::Parse(const std::string &text, uint64_t alpha) {
  ParadigmSpec p;
  std::string name = text;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    name = text.substr(0, colon);
    const std::string digits = text.substr(colon + 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw InvalidArgument("paradigm '" + text + "': bound must be a non-negative integer");
    }
    alpha = std::stoull(digits);
  }
  if (name == "sync" || name == "synchronous") {
    p.kind = Paradigm::kSynchronous;
  } else if (name == "one_off" || name == "one-off") {
    p.kind = Paradigm::kOneOff;
  } else if (name == "async") {
    p.kind = alpha == 0 ? Paradigm::kSynchronous : Paradigm::kAsync;
    p.alpha = alpha;
  } else {
    throw InvalidArgument("unknown paradigm '" + text + "'");
  }
  return p;
}

void TrainerConfig::Validate() const {
  std::vector<std::string> diags;
  if (devices.empty()) diags.push_back("training.devices: at least one device");
  if (steps < 1) diags.push_back("steps: must be >= 1");
  if (groups_per_batch < 1) diags.push_back("rollout.groups: must be >= 1");
  if (group_size < 1) diags.push_back("rollout.group_size: must be >= 1");
  if (checkpoint_interval < 1) diags.push_back("training.checkpoint_interval: must be >= 1");
  if (max_inflight_groups < 0) diags.push_back("rollout.max_inflight_groups: must be >= 0");
  for (const auto &f : failures) {
    if (f.step < 0) diags.push_back("faults.trainer_failures.step: must be >= 0");
    if (!sim::IsValidDuration(f.restart_delay)) {
      diags.push_back("faults.trainer_failures.restart_delay: must be >= 0");
    }
  }
  if (!diags.empty()) throw ValidationError(std::move(diags));
  model.Validate();
}

Pipeline::Pipeline(sim::Kernel &kernel, TrainerConfig config, rollout::RolloutScheduler &rollout,
                   buffer::SampleBuffer &buffer, WeightStore &store, FleetHooks fleet)
    : kernel_(kernel),
      config_(std::move(config)),
      rollout_(rollout),
      buffer_(buffer),
      store_(store),
      fleet_(std::move(fleet)) {
  config_.Validate();
  if (buffer_.alpha() != config_.paradigm.BufferAlpha()) {
    throw InvalidArgument("pipeline: buffer bound does not match paradigm " +
                          config_.paradigm.ToString());
  }
  actor_ = kernel_.RegisterActor("trainer");
  max_inflight_ =
      config_.max_inflight_groups > 0 ? config_.max_inflight_groups : config_.groups_per_batch;
  rollout_.SetCompletionListener([this](const rollout::Trajectory &t) { buffer_.Put(t); });
  rollout_.SetGroupListener(
      [this](const rollout::RolloutScheduler::GroupInfo &g, bool ok) { OnGroupSettled(g, ok); });
  buffer_.SetGroupKilledListener([this](uint64_t gid) {
    rollout_.AbortGroup(gid, "group member discarded as stale", true);
  });
}

void Pipeline::SetParadigm(ParadigmSpec paradigm) {
  if (started_) throw StateError("pipeline: paradigm is fixed once the run started");
  if (paradigm.BufferAlpha() != buffer_.alpha()) {
    throw InvalidArgument("pipeline: buffer bound does not match paradigm " + paradigm.ToString());
  }
  config_.paradigm = paradigm;
}

sim::SimTime Pipeline::TrainTime(int64_t tokens) const {
  return workload::TrainStepTime(std::max<int64_t>(1, tokens), config_.model, config_.devices);
}

void Pipeline::Start() {
  if (started_) throw StateError("pipeline: already started");
  started_ = true;
  kernel_.Schedule(0.0, actor_, "pipeline_start",
                   [this]() {
                     if (config_.paradigm.kind == Paradigm::kOneOff) {
                       rollout_.LaunchBatch(config_.groups_per_batch, deployed_);
                     }
                     TopUp();
                     BeginStep();
                   },
                   "paradigm=" + config_.paradigm.ToString());
}

void Pipeline::BeginStep() {
  current_ = PhaseReport{};
  current_.step = step_;
  current_.start = kernel_.Now();
  stale_base_ = rollout_.stats().stale_aborts + buffer_.stale_rejects() + buffer_.evictions();
  wasted_base_ = rollout_.stats().wasted_tokens + buffer_.discarded_tokens();
  if (config_.paradigm.kind == Paradigm::kSynchronous) {
    rollout_.LaunchBatch(config_.groups_per_batch, deployed_);
  }
  buffer_.GetBatch(batch_size(),
                   [this](std::vector<rollout::Trajectory> batch) { OnBatch(std::move(batch)); });
}

void Pipeline::OnBatch(std::vector<rollout::Trajectory> batch) {
  const sim::SimTime now = kernel_.Now();
  current_.get_batch_stall = now - current_.start;
  current_.trajectories = static_cast<int64_t>(batch.size());
  sim::SimTime first_launch = now;
  for (const auto &t : batch) {
    current_.prompt_tokens += t.prompt_tokens;
    current_.response_tokens += t.response_tokens;
    current_.max_staleness = std::max(current_.max_staleness, version_ - t.init_version);
    first_launch = std::min(first_launch, rollout_.group(t.group_id).launch_time);
  }
  current_.rollout_time = now - first_launch;
  spans_.push_back(PhaseSpan{step_, "get_batch", current_.start, now});

  auto train_and_finish = [this]() {
    TrainThen([this]() {
      AdvanceVersion();
      store_.Publish(version_, kernel_.Now());
      EndStep();
    });
  };

  switch (config_.paradigm.kind) {
    case Paradigm::kSynchronous:
      TrainThen([this]() {
        AdvanceVersion();
        store_.Publish(version_, kernel_.Now());
        ModelUpdate(version_, [this]() { EndStep(); });
      });
      return;
    case Paradigm::kOneOff: {
      auto launch_then_train = [this, train_and_finish]() {
        rollout_.LaunchBatch(config_.groups_per_batch, deployed_);
        train_and_finish();
      };
      if (store_.latest() > deployed_) {
        ModelUpdate(store_.latest(), launch_then_train);
      } else {
        launch_then_train();
      }
      return;
    }
    case Paradigm::kAsync: {
      auto topup_then_train = [this, train_and_finish]() {
        TopUp();
        train_and_finish();
      };
      if (store_.latest() > deployed_) {
        ModelUpdate(store_.latest(), topup_then_train);
      } else {
        topup_then_train();
      }
      return;
    }
  }
}

void Pipeline::TrainThen(std::function<void()> next) {
  const sim::SimTime compute = TrainTime(current_.prompt_tokens + current_.response_tokens);
  sim::SimTime recovery = 0.0;
  for (const auto &f : config_.failures) {
    if (f.step != step_) continue;
    // Steps finished since the last checkpoint are replayed after restart.
    const auto interval = static_cast<uint64_t>(config_.checkpoint_interval);
    const uint64_t lost = version_ % interval;
    recovery += f.restart_delay + static_cast<double>(lost) * compute;
  }
  current_.train_compute = compute;
  current_.recovery = recovery;
  const sim::SimTime now = kernel_.Now();
  train_busy_.AddBusy(now, now + compute);
  spans_.push_back(PhaseSpan{step_, "train_compute", now, now + compute});
  if (recovery > 0) {
    spans_.push_back(PhaseSpan{step_, "recovery", now + compute, now + compute + recovery});
  }
  kernel_.Schedule(compute + recovery, actor_, "train_step_done", std::move(next),
                   "step=" + std::to_string(step_) +
                       (recovery > 0 ? " recovered_from_checkpoint" : ""));
}

void Pipeline::AdvanceVersion() {
  ++version_;
  buffer_.OnVersionAdvance(version_);
  const uint64_t alpha = config_.paradigm.BufferAlpha();
  if (!config_.finish_then_reject && version_ > alpha) {
    rollout_.AbortStale(version_ - alpha);
  }
}

void Pipeline::CaptureFirstToken() {
  if (resume_owner_ < 0 || !fleet_.first_token_after_resume) return;
  const auto t = fleet_.first_token_after_resume();
  if (!t || *t < last_resume_) return;
  PhaseReport &owner = resume_owner_ < static_cast<int64_t>(reports_.size())
                           ? reports_[static_cast<size_t>(resume_owner_)]
                           : current_;
  if (!owner.resume_to_first_token) owner.resume_to_first_token = *t - last_resume_;
}

void Pipeline::ModelUpdate(uint64_t version, std::function<void()> next) {
  CaptureFirstToken();
  const sim::SimTime t0 = kernel_.Now();
  auto shared_next = std::make_shared<std::function<void()>>(std::move(next));
  fleet_.suspend_all([this, t0, version, shared_next]() {
    const sim::SimTime halted = kernel_.Now();
    const SyncBreakdown plan = store_.PlanUpdate(version, halted, config_.background_publication);
    kernel_.Schedule(
        plan.total(), actor_, "model_update_done",
        [this, t0, halted, version, plan, shared_next]() {
          fleet_.set_version(version);
          rollout_.SetServingVersion(version);
          deployed_ = version;
          distributions_.emplace_back(version, kernel_.Now());
          fleet_.resume_all();
          last_resume_ = kernel_.Now();
          resume_owner_ = step_;
          current_.synced = true;
          spans_.push_back(PhaseSpan{step_, "suspend_window", t0, kernel_.Now()});
          current_.suspend_window = kernel_.Now() - t0;
          current_.drain = halted - t0;
          current_.store_retry = plan.retry;
          current_.transfer_residual = plan.residual;
          current_.broadcast = plan.broadcast;
          current_.full_transfer = plan.full_transfer;
          current_.publication_completed_fraction = plan.completed_fraction;
          TopUp();
          (*shared_next)();
        },
        "version=" + std::to_string(version) + " pool=" + plan.pool);
  });
}

void Pipeline::EndStep() {
  const sim::SimTime now = kernel_.Now();
  current_.end = now;
  current_.step_time = now - current_.start;
  current_.version = version_;
  current_.deployed_version = deployed_;
  current_.stale_aborts =
      rollout_.stats().stale_aborts + buffer_.stale_rejects() + buffer_.evictions() - stale_base_;
  current_.wasted_tokens =
      rollout_.stats().wasted_tokens + buffer_.discarded_tokens() - wasted_base_;
  current_.idle = current_.step_time - (current_.get_batch_stall + current_.train_compute +
                                        current_.recovery + current_.suspend_window);
  reports_.push_back(current_);
  CaptureFirstToken();
  ++step_;
  if (step_ >= config_.steps) {
    finished_ = true;
    kernel_.RequestStop();
    return;
  }
  kernel_.Schedule(0.0, actor_, "step_begin", [this]() { BeginStep(); },
                   "step=" + std::to_string(step_));
}

void Pipeline::TopUp() {
  if (finished_ || !started_ || config_.paradigm.kind != Paradigm::kAsync) return;
  // Complete groups waiting in the buffer still count against the window.
  while (rollout_.unsettled_groups() + buffer_.undelivered_groups() < max_inflight_) {
    rollout_.LaunchGroup(deployed_);
  }
}

void Pipeline::OnGroupSettled(const rollout::RolloutScheduler::GroupInfo &, bool ok) {
  if (finished_) return;
  if (!ok && config_.paradigm.kind != Paradigm::kAsync) {
    rollout_.LaunchBatch(1, deployed_);
    return;
  }
  TopUp();
}

}  // namespace rollsim::train
