// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/sim/kernel.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <thread>

#include "json.hpp"

namespace rollsim::sim {
namespace {

constexpr size_t kRecentTrace = 32;

uint64_t HashWord(uint64_t h, uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string FormatTraceRecord(const TraceRecord &record) {
  char time_buf[64];
  std::snprintf(time_buf, sizeof(time_buf), "%.9f", record.time);
  std::string line = "{\"time\":";
  line += time_buf;
  line += ",\"seq\":" + std::to_string(record.seq);
  line += ",\"actor\":" + nlohmann::json(record.actor).dump();
  line += ",\"event_kind\":" + nlohmann::json(record.kind).dump();
  line += ",\"payload_summary\":" + nlohmann::json(record.summary).dump();
  line += "}";
  return line;
}

SimulationError::SimulationError(const std::string &what, std::vector<TraceRecord> trace_tail)
    : Error(what), trace_tail_(std::move(trace_tail)) {}

Kernel::Kernel(uint64_t root_seed, TraceMode mode)
    : root_seed_(root_seed), mode_(mode), digest_(Fnv1a64("rollsim-trace")) {}

ActorId Kernel::RegisterActor(std::string name) {
  actors_.push_back(std::move(name));
  return ActorId{static_cast<uint32_t>(actors_.size() - 1)};
}

const std::string &Kernel::ActorName(ActorId id) const {
  if (id.value >= actors_.size()) throw NotFound("unknown actor id " + std::to_string(id.value));
  return actors_[id.value];
}

EventId Kernel::Schedule(SimTime delay, ActorId target, std::string_view kind,
                         std::function<void()> handler, std::string summary) {
  if (!IsValidDuration(delay)) {
    throw InvalidArgument("schedule: delay must be finite and >= 0, got " + std::to_string(delay));
  }
  if (target.value >= actors_.size()) {
    throw NotFound("schedule: unknown target actor " + std::to_string(target.value));
  }
  const uint64_t seq = next_seq_++;
  heap_.push_back(Event{now_ + delay, seq, target, std::string(kind), std::move(summary),
                        std::move(handler)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  states_.push_back(EventState::kPending);
  ++pending_;
  return EventId{seq};
}

bool Kernel::Cancel(EventId id) {
  if (!IsPending(id)) return false;
  states_[id.seq] = EventState::kCancelled;
  --pending_;
  return true;
}

bool Kernel::IsPending(EventId id) const {
  return id.seq < states_.size() && states_[id.seq] == EventState::kPending;
}

void Kernel::SetWallClockScale(double wall_seconds_per_sim_second) {
  if (!(wall_seconds_per_sim_second >= 0.0) || !std::isfinite(wall_seconds_per_sim_second)) {
    throw InvalidArgument("wall clock scale must be finite and >= 0");
  }
  wall_scale_ = wall_seconds_per_sim_second;
}

void Kernel::Record(const Event &event) {
  digest_ = HashWord(digest_, std::bit_cast<uint64_t>(event.time));
  digest_ = HashWord(digest_, event.seq);
  digest_ = HashWord(digest_, event.target.value);
  digest_ = Fnv1a64(event.kind, digest_);
  digest_ = Fnv1a64(event.summary, digest_);

  TraceRecord record{event.time, event.seq, actors_[event.target.value], event.kind,
                     event.summary};
  if (recent_.size() == kRecentTrace) recent_.pop_front();
  recent_.push_back(record);
  if (mode_ == TraceMode::kFull) trace_.push_back(std::move(record));
}

SimTime Kernel::RunUntil(SimTime limit) {
  stop_requested_ = false;
  const auto wall_start = std::chrono::steady_clock::now();
  const SimTime sim_start = now_;
  while (!heap_.empty() && !stop_requested_) {
    if (heap_.front().time > limit) break;
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event event = std::move(heap_.back());
    heap_.pop_back();
    if (states_[event.seq] == EventState::kCancelled) continue;
    states_[event.seq] = EventState::kDone;
    --pending_;

    if (wall_scale_ > 0.0) {
      const auto offset = std::chrono::duration<double>((event.time - sim_start) * wall_scale_);
      std::this_thread::sleep_until(
          wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset));
    }
    now_ = event.time;
    ++processed_;
    Record(event);
    try {
      event.handler();
    } catch (const SimulationError &) {
      throw;
    } catch (const std::exception &e) {
      throw SimulationError(std::string("actor '") + actors_[event.target.value] + "' failed in '" +
                                event.kind + "' at t=" + std::to_string(now_) + ": " + e.what(),
                            {recent_.begin(), recent_.end()});
    }
  }
  return now_;
}

}  // namespace rollsim::sim
