// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>

#include "rollsim/sim/kernel.h"

namespace rollsim::proxy {

enum class GenerationStatus { kCompleted, kAborted, kFailed };

const char *GenerationStatusName(GenerationStatus s);

struct GenerationResult {
  uint64_t request_id = 0;
  uint64_t trajectory_id = 0;
  GenerationStatus status = GenerationStatus::kCompleted;
  std::string worker;
  int64_t prefilled_tokens = 0;
  int64_t decoded_tokens = 0;
  /// Tokens re-prefilled after resume under new weights.
  int64_t recompute_tokens = 0;
  sim::SimTime submit_time = 0.0;
  sim::SimTime finish_time = 0.0;
  uint64_t first_version = 0;
  uint64_t last_version = 0;
  bool affinity_fallback = false;
  std::string error;
};

using GenerationCallback = std::function<void(const GenerationResult &)>;

struct GenerationRequest {
  uint64_t request_id = 0;
  uint64_t trajectory_id = 0;
  std::string tag = "default";
  int64_t context_tokens = 1;
  int64_t max_new_tokens = 1;
  /// Turn budget drawn from the task; generation stops at
  /// min(max_new_tokens, stop_after_tokens). Zero means no extra stop.
  int64_t stop_after_tokens = 0;
  /// Actor the completion callback is delivered to.
  sim::ActorId reply_to;
  GenerationCallback callback;

  int64_t target_tokens() const {
    return stop_after_tokens > 0 ? std::min(max_new_tokens, stop_after_tokens) : max_new_tokens;
  }
};

/// Client side of trajectory-level generation. Implemented by LlmProxy and by
/// test doubles.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual void Submit(GenerationRequest request) = 0;
  virtual void Abort(uint64_t request_id) = 0;
};

}  // namespace rollsim::proxy
