// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rollsim/common/error.h"
#include "rollsim/sim/random.h"
#include "rollsim/sim/time.h"

namespace rollsim::sim {

struct ActorId {
  uint32_t value = 0;
  friend bool operator==(ActorId, ActorId) = default;
};

/// Cancellable handle to a scheduled event; wraps the event's sequence number.
struct EventId {
  uint64_t seq = 0;
  friend bool operator==(EventId, EventId) = default;
};

/// One delivered event, as recorded in the trace.
struct TraceRecord {
  SimTime time;
  uint64_t seq;
  std::string actor;
  std::string kind;
  std::string summary;
};

/// Serializes a record as one JSON line with fixed 9-decimal time.
std::string FormatTraceRecord(const TraceRecord &record);

/// Raised out of Run* when an event handler throws. Carries the tail of the
/// event trace up to and including the failing event.
class SimulationError : public Error {
 public:
  SimulationError(const std::string &what, std::vector<TraceRecord> trace_tail);
  const std::vector<TraceRecord> &trace_tail() const { return trace_tail_; }

 private:
  std::vector<TraceRecord> trace_tail_;
};

/// Deterministic discrete-event kernel.
///
/// Events are totally ordered by (time, seq) where seq is the insertion
/// counter. Handlers run one at a time on the caller's thread; an actor is a
/// named mailbox, and an event is a closure delivered to that actor.
class Kernel {
 public:
  enum class TraceMode {
    kDigest,  // rolling hash only
    kFull,    // keep every record in memory
  };

  explicit Kernel(uint64_t root_seed, TraceMode mode = TraceMode::kDigest);
  Kernel(const Kernel &) = delete;
  Kernel &operator=(const Kernel &) = delete;

  ActorId RegisterActor(std::string name);
  const std::string &ActorName(ActorId id) const;

  /// Enqueues `handler` to run on `target` at Now() + delay.
  EventId Schedule(SimTime delay, ActorId target, std::string_view kind,
                   std::function<void()> handler, std::string summary = {});
  /// Returns false when the event already fired or was cancelled.
  bool Cancel(EventId id);
  bool IsPending(EventId id) const;

  /// Processes every event with time <= limit and returns the clock.
  SimTime RunUntil(SimTime limit);
  SimTime RunUntilQuiescent() { return RunUntil(kTimeInfinity); }
  /// Makes the current Run* call return after the executing handler.
  void RequestStop() { stop_requested_ = true; }

  SimTime Now() const { return now_; }
  uint64_t root_seed() const { return root_seed_; }
  RandomStream Stream(std::string_view label) const { return RandomStream(root_seed_, std::string(label)); }

  size_t pending_events() const { return pending_; }
  uint64_t processed_events() const { return processed_; }
  uint64_t trace_digest() const { return digest_; }
  const std::vector<TraceRecord> &trace() const { return trace_; }

  /// Wall-clock mode: sleep `wall_seconds_per_sim_second` of real time per
  /// virtual second before delivering each event. Zero disables it.
  void SetWallClockScale(double wall_seconds_per_sim_second);

 private:
  struct Event {
    SimTime time;
    uint64_t seq;
    ActorId target;
    std::string kind;
    std::string summary;
    std::function<void()> handler;
  };
  struct Later {
    bool operator()(const Event &a, const Event &b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  enum class EventState : uint8_t { kPending, kDone, kCancelled };

  void Record(const Event &event);

  uint64_t root_seed_;
  TraceMode mode_;
  SimTime now_ = 0.0;
  uint64_t next_seq_ = 0;
  size_t pending_ = 0;
  uint64_t processed_ = 0;
  bool stop_requested_ = false;
  double wall_scale_ = 0.0;
  std::vector<std::string> actors_;
  std::vector<Event> heap_;
  std::vector<EventState> states_;
  uint64_t digest_;
  std::vector<TraceRecord> trace_;
  std::deque<TraceRecord> recent_;
};

}  // namespace rollsim::sim
