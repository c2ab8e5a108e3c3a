// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/workload/perf_model.h"

#include <algorithm>
#include <cmath>

#include "rollsim/common/error.h"

namespace rollsim::workload {

void ModelSpec::Validate() const {
  if (!(params > 0.0) || !std::isfinite(params)) {
    throw InvalidArgument("model '" + name + "': params must be positive");
  }
  if (!(bytes_per_param > 0.0)) {
    throw InvalidArgument("model '" + name + "': bytes_per_param must be positive");
  }
  if (!(kv_bytes_per_token > 0.0)) {
    throw InvalidArgument("model '" + name + "': kv_bytes_per_token must be positive");
  }
}

std::optional<ModelSpec> BuiltinModel(const std::string &name) {
  // params = checkpoint bytes / 2; kv = layers * kv_heads * head_dim * 2 (K,V) * 2 bytes.
  if (name == "Qwen3-8B") return ModelSpec{name, 15.26 * kGiB / 2.0, 2.0, 36.0 * 8 * 128 * 4};
  if (name == "Qwen3-14B") return ModelSpec{name, 27.51 * kGiB / 2.0, 2.0, 40.0 * 8 * 128 * 4};
  if (name == "Qwen3-32B") return ModelSpec{name, 61.02 * kGiB / 2.0, 2.0, 64.0 * 8 * 128 * 4};
  if (name == "Qwen2.5-7B") return ModelSpec{name, 7.62e9, 2.0, 28.0 * 4 * 128 * 4};
  return std::nullopt;
}

sim::SimTime PrefillTime(int64_t context_tokens, const ModelSpec &model,
                         const HardwareProfile &hw, double prefix_discount) {
  if (context_tokens < 0) throw InvalidArgument("prefill: token count must be >= 0");
  if (!(prefix_discount > 0.0 && prefix_discount <= 1.0)) {
    throw InvalidArgument("prefill: prefix discount must be in (0, 1]");
  }
  return static_cast<double>(context_tokens) * 2.0 * model.params / hw.EffectiveFlops() *
         prefix_discount;
}

sim::SimTime DecodeStepTime(int64_t batch_size, const ModelSpec &model,
                            const HardwareProfile &hw, int64_t resident_tokens) {
  if (batch_size < 1) throw InvalidArgument("decode: batch size must be >= 1");
  const double footprint =
      model.weight_bytes() + static_cast<double>(resident_tokens) * model.kv_bytes_per_token;
  if (footprint > hw.hbm_bytes) {
    const double free_tokens = std::floor(KvBudgetBytes(model, hw) / model.kv_bytes_per_token);
    throw CapacityError("decode: KV cache of " + std::to_string(resident_tokens) +
                            " tokens exceeds device memory on " + hw.name,
                        static_cast<int64_t>(std::max(0.0, free_tokens)));
  }
  const double memory_floor = model.weight_bytes() / hw.EffectiveHbmBandwidth();
  const double compute = static_cast<double>(batch_size) * 2.0 * model.params / hw.EffectiveFlops();
  return std::max(memory_floor, compute);
}

double DecodeCrossoverBatch(const ModelSpec &model, const HardwareProfile &hw) {
  return model.weight_bytes() * hw.EffectiveFlops() /
         (2.0 * model.params * hw.EffectiveHbmBandwidth());
}

sim::SimTime TrainStepTime(int64_t batch_tokens, const ModelSpec &model,
                           std::span<const HardwareProfile> pool) {
  if (pool.empty()) throw InvalidArgument("train: hardware pool must be non-empty");
  if (batch_tokens < 0) throw InvalidArgument("train: token count must be >= 0");
  double flops = 0.0;
  for (const auto &hw : pool) flops += hw.EffectiveFlops();
  return static_cast<double>(batch_tokens) * 6.0 * model.params / flops;
}

double KvBudgetBytes(const ModelSpec &model, const HardwareProfile &hw) {
  return std::max(0.0, hw.hbm_bytes - model.weight_bytes());
}

}  // namespace rollsim::workload
