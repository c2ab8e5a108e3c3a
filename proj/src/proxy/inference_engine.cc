// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/proxy/inference_engine.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>

#include "rollsim/common/error.h"
#include "rollsim/workload/perf_model.h"

namespace rollsim::proxy {

const char *GenerationStatusName(GenerationStatus s) {
  switch (s) {
    case GenerationStatus::kCompleted:
      return "completed";
    case GenerationStatus::kAborted:
      return "aborted";
    case GenerationStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

const char *StepKindName(StepKind kind) {
  switch (kind) {
    case StepKind::kPrefill:
      return "prefill";
    case StepKind::kDecode:
      return "decode";
    case StepKind::kRecompute:
      return "recompute";
  }
  return "unknown";
}

namespace {

const char *CommandName(Command::Kind kind) {
  switch (kind) {
    case Command::Kind::kAdd:
      return "ADD";
    case Command::Kind::kAbort:
      return "ABORT";
    case Command::Kind::kSuspend:
      return "SUSPEND";
    case Command::Kind::kResume:
      return "RESUME";
  }
  return "?";
}

}  // namespace

InferenceEngine::InferenceEngine(sim::Kernel &kernel, std::string id, EngineConfig config,
                                 TerminalSink sink, std::vector<StepTraceRecord> *step_trace)
    : cluster::Worker(std::move(id)),
      kernel_(kernel),
      config_(std::move(config)),
      sink_(std::move(sink)),
      step_trace_(step_trace) {
  config_.model.Validate();
  config_.hw.Validate();
  if (config_.chunk_size < 1) throw InvalidArgument("engine: chunk_size must be >= 1");
  if (config_.max_running < 1) throw InvalidArgument("engine: max_running must be >= 1");
  kv_budget_ = workload::KvBudgetBytes(config_.model, config_.hw);
  actor_ = kernel_.RegisterActor("engine/" + this->id());
}

double InferenceEngine::Footprint(const GenerationRequest &r) const {
  return static_cast<double>(r.context_tokens + r.target_tokens()) * config_.model.kv_bytes_per_token;
}

int64_t InferenceEngine::Outstanding() const {
  int64_t pending_adds = 0;
  for (const auto &c : pending_) {
    if (c.kind == Command::Kind::kAdd) ++pending_adds;
  }
  return static_cast<int64_t>(resident_.size() + waiting_.size()) + inbound_ + pending_adds;
}

bool InferenceEngine::HasAdmissionCapacity() const {
  if (!alive_) return false;
  if (Outstanding() >= config_.max_running) return false;
  double reserved = kv_used_;
  for (const auto &s : waiting_) reserved += s.kv_reserved;
  return reserved < kv_budget_;
}

void InferenceEngine::Deliver(Command command) {
  std::string summary = CommandName(command.kind);
  if (command.kind == Command::Kind::kAdd) {
    ++inbound_;
    summary += " req=" + std::to_string(command.request.request_id) +
               " ctx=" + std::to_string(command.request.context_tokens);
  } else if (command.kind == Command::Kind::kAbort) {
    summary += " req=" + std::to_string(command.request_id);
  }
  auto shared = std::make_shared<Command>(std::move(command));
  kernel_.Schedule(0.0, actor_, CommandName(shared->kind),
                   [this, shared]() { OnCommand(std::move(*shared)); }, std::move(summary));
}

void InferenceEngine::OnCommand(Command command) {
  if (command.kind == Command::Kind::kAdd) --inbound_;
  if (!alive_) {
    if (command.kind == Command::Kind::kAdd) {
      GenerationResult r;
      r.request_id = command.request.request_id;
      r.trajectory_id = command.request.trajectory_id;
      r.status = GenerationStatus::kFailed;
      r.worker = id();
      r.error = "worker down";
      r.finish_time = kernel_.Now();
      sink_(command.request, r);
    } else if (command.kind == Command::Kind::kSuspend && command.ack) {
      command.ack();
    }
    return;
  }
  if (command.kind == Command::Kind::kSuspend) suspend_requested_ = true;
  pending_.push_back(std::move(command));
  if (busy()) {
    Truncate();
    return;
  }
  Drain();
  MaybeStartStep();
}

void InferenceEngine::Drain() {
  std::deque<Command> held;
  while (!pending_.empty()) {
    Command c = std::move(pending_.front());
    pending_.pop_front();
    if (suspended_ && c.kind != Command::Kind::kResume) {
      if (c.kind == Command::Kind::kSuspend) {
        if (c.ack) c.ack();
      } else {
        held.push_back(std::move(c));
      }
      continue;
    }
    const bool resume = c.kind == Command::Kind::kResume;
    Apply(c);
    if (resume) {
      while (!held.empty()) {
        pending_.push_front(std::move(held.back()));
        held.pop_back();
      }
    }
  }
  pending_ = std::move(held);
}

void InferenceEngine::Apply(Command &command) {
  switch (command.kind) {
    case Command::Kind::kAdd: {
      Slot slot;
      slot.request = std::move(command.request);
      slot.kv_reserved = Footprint(slot.request);
      slot.submit_time = kernel_.Now();
      slot.first_version = version_;
      if (slot.kv_reserved > kv_budget_) {
        Finish(std::move(slot), GenerationStatus::kFailed, "request exceeds KV capacity");
        return;
      }
      waiting_.push_back(std::move(slot));
      return;
    }
    case Command::Kind::kAbort: {
      const uint64_t id = command.request_id;
      auto w = std::find_if(waiting_.begin(), waiting_.end(),
                            [id](const Slot &s) { return s.request.request_id == id; });
      if (w != waiting_.end()) {
        Slot slot = std::move(*w);
        waiting_.erase(w);
        Finish(std::move(slot), GenerationStatus::kAborted);
        return;
      }
      auto r = std::find_if(resident_.begin(), resident_.end(),
                            [id](const Slot &s) { return s.request.request_id == id; });
      if (r != resident_.end()) {
        Slot slot = std::move(*r);
        resident_.erase(r);
        kv_used_ -= slot.kv_reserved;
        Finish(std::move(slot), GenerationStatus::kAborted);
      }
      return;
    }
    case Command::Kind::kSuspend:
      suspended_ = true;
      suspend_requested_ = false;
      if (command.ack) command.ack();
      return;
    case Command::Kind::kResume:
      if (!suspended_) return;
      suspended_ = false;
      for (auto &slot : resident_) slot.recompute_pending = slot.prefilled + slot.decoded;
      resumed_at_ = kernel_.Now();
      first_decode_after_resume_.reset();
      return;
  }
}

void InferenceEngine::Admit() {
  while (!waiting_.empty() && static_cast<int64_t>(resident_.size()) < config_.max_running &&
         kv_used_ + waiting_.front().kv_reserved <= kv_budget_) {
    kv_used_ += waiting_.front().kv_reserved;
    resident_.push_back(std::move(waiting_.front()));
    waiting_.pop_front();
  }
}

void InferenceEngine::MaybeStartStep() {
  if (!alive_ || suspended_ || busy()) return;
  Admit();
  if (resident_.empty()) return;

  ActiveStep step{};
  step.start = kernel_.Now();
  step.steps = 1;
  step.batch = static_cast<int64_t>(resident_.size());

  int64_t recompute = 0;
  for (const auto &s : resident_) recompute += s.recompute_pending;
  bool needs_prefill = false;
  for (const auto &s : resident_) needs_prefill |= s.prefilled < s.request.context_tokens;

  if (recompute > 0) {
    step.kind = StepKind::kRecompute;
    step.tokens = recompute;
    step.per_step = workload::PrefillTime(recompute, config_.model, config_.hw);
  } else if (needs_prefill) {
    step.kind = StepKind::kPrefill;
    int64_t budget = config_.chunk_size;
    for (const auto &s : resident_) {
      if (budget == 0) break;
      const int64_t left = s.request.context_tokens - s.prefilled;
      if (left <= 0) continue;
      const int64_t take = std::min(left, budget);
      step.chunk.emplace_back(s.request.request_id, take);
      budget -= take;
    }
    step.tokens = config_.chunk_size - budget;
    step.batch = static_cast<int64_t>(step.chunk.size());
    step.per_step = workload::PrefillTime(step.tokens, config_.model, config_.hw,
                                          config_.prefix_discount);
  } else {
    step.kind = StepKind::kDecode;
    int64_t steps = INT64_MAX;
    for (const auto &s : resident_) steps = std::min(steps, s.request.target_tokens() - s.decoded);
    step.steps = std::max<int64_t>(1, steps);
    const auto resident_tokens =
        static_cast<int64_t>(std::llround(kv_used_ / config_.model.kv_bytes_per_token));
    step.per_step = workload::DecodeStepTime(step.batch, config_.model, config_.hw, resident_tokens);
    step.tokens = step.batch;
  }
  active_ = step;
  step_event_ = kernel_.Schedule(step.per_step * static_cast<double>(step.steps), actor_,
                                 StepKindName(step.kind), [this]() { FinishStep(); },
                                 "batch=" + std::to_string(step.batch) +
                                     " steps=" + std::to_string(step.steps));
}

void InferenceEngine::Truncate() {
  if (!active_ || active_->kind != StepKind::kDecode || active_->steps <= 1) return;
  const double elapsed = kernel_.Now() - active_->start;
  auto done = static_cast<int64_t>(std::ceil(elapsed / active_->per_step - 1e-9));
  done = std::clamp<int64_t>(done, 1, active_->steps);
  if (done == active_->steps) return;
  kernel_.Cancel(*step_event_);
  active_->steps = done;
  const sim::SimTime end = active_->start + active_->per_step * static_cast<double>(done);
  step_event_ = kernel_.Schedule(std::max(0.0, end - kernel_.Now()), actor_, "decode",
                                 [this]() { FinishStep(); },
                                 "batch=" + std::to_string(active_->batch) +
                                     " steps=" + std::to_string(done) + " cut");
}

void InferenceEngine::FinishStep() {
  step_event_.reset();
  ActiveStep step = std::move(*active_);
  active_.reset();
  const sim::SimTime now = kernel_.Now();
  busy_.AddBusy(step.start, now);

  switch (step.kind) {
    case StepKind::kRecompute:
      for (auto &s : resident_) {
        s.recompute_total += s.recompute_pending;
        s.recompute_pending = 0;
      }
      break;
    case StepKind::kPrefill:
      for (const auto &[rid, n] : step.chunk) {
        for (auto &s : resident_) {
          if (s.request.request_id == rid) s.prefilled += n;
        }
      }
      break;
    case StepKind::kDecode:
      for (auto &s : resident_) s.decoded += step.steps;
      if (resumed_at_ && !first_decode_after_resume_) first_decode_after_resume_ = now;
      break;
  }
  if (step_trace_ != nullptr) {
    step_trace_->push_back(StepTraceRecord{step.start, id(), step.kind, step.batch,
                                           step.tokens * step.steps, kv_used_, step.steps,
                                           now - step.start, version_});
  }

  std::vector<Slot> still;
  still.reserve(resident_.size());
  std::vector<Slot> done;
  for (auto &s : resident_) {
    if (s.decoded >= s.request.target_tokens()) {
      done.push_back(std::move(s));
    } else {
      still.push_back(std::move(s));
    }
  }
  resident_ = std::move(still);
  for (auto &s : done) {
    kv_used_ -= s.kv_reserved;
    Finish(std::move(s), GenerationStatus::kCompleted);
  }
  if (resident_.empty() && waiting_.empty()) kv_used_ = 0.0;

  Drain();
  MaybeStartStep();
}

void InferenceEngine::Finish(Slot slot, GenerationStatus status, const std::string &error) {
  GenerationResult r;
  r.request_id = slot.request.request_id;
  r.trajectory_id = slot.request.trajectory_id;
  r.status = status;
  r.worker = id();
  r.prefilled_tokens = slot.prefilled;
  r.decoded_tokens = slot.decoded;
  r.recompute_tokens = slot.recompute_total;
  r.submit_time = slot.submit_time;
  r.finish_time = kernel_.Now();
  r.first_version = slot.first_version;
  r.last_version = version_;
  r.error = error;
  sink_(slot.request, r);
}

std::vector<GenerationRequest> InferenceEngine::Fail() {
  std::vector<GenerationRequest> lost;
  if (!alive_) return lost;
  alive_ = false;
  if (step_event_) {
    kernel_.Cancel(*step_event_);
    busy_.AddBusy(active_->start, kernel_.Now());
    step_event_.reset();
    active_.reset();
  }
  for (auto &s : resident_) lost.push_back(std::move(s.request));
  for (auto &s : waiting_) lost.push_back(std::move(s.request));
  std::vector<std::function<void()>> acks;
  for (auto &c : pending_) {
    if (c.kind == Command::Kind::kAdd) lost.push_back(std::move(c.request));
    if (c.kind == Command::Kind::kSuspend && c.ack) acks.push_back(std::move(c.ack));
  }
  resident_.clear();
  waiting_.clear();
  pending_.clear();
  kv_used_ = 0.0;
  suspended_ = false;
  suspend_requested_ = false;
  for (auto &ack : acks) ack();
  return lost;
}

void InferenceEngine::Revive() { alive_ = true; }

}  // namespace rollsim::proxy
