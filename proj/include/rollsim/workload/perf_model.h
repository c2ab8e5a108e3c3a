// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "rollsim/sim/time.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/model_spec.h"

namespace rollsim::workload {

// Roofline cost model: 2P FLOPs per token forward, 6P per token for a
// training pass, and a decode step that reads every weight once.

/// tokens * 2P / achieved FLOP/s, scaled by `prefix_discount` in (0, 1].
sim::SimTime PrefillTime(int64_t context_tokens, const ModelSpec &model,
                         const HardwareProfile &hw, double prefix_discount = 1.0);

/// max(weight-read time, batch * 2P / achieved FLOP/s). Throws CapacityError
/// when weights plus `resident_tokens` of KV cache exceed device memory.
sim::SimTime DecodeStepTime(int64_t batch_size, const ModelSpec &model,
                            const HardwareProfile &hw, int64_t resident_tokens = 0);

/// Batch size at which the compute term of DecodeStepTime overtakes the
/// weight-read floor.
double DecodeCrossoverBatch(const ModelSpec &model, const HardwareProfile &hw);

/// batch_tokens * 6P / sum of achieved FLOP/s over the pool (perfect scaling).
sim::SimTime TrainStepTime(int64_t batch_tokens, const ModelSpec &model,
                           std::span<const HardwareProfile> pool);

/// Bytes of device memory left for KV cache after loading the weights.
double KvBudgetBytes(const ModelSpec &model, const HardwareProfile &hw);

}  // namespace rollsim::workload
