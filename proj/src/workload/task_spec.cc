// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/workload/task_spec.h"

#include "rollsim/common/error.h"

namespace rollsim::workload {

const char *RewardClassName(RewardClass c) {
  switch (c) {
    case RewardClass::kRuleBased:
      return "rule_based";
    case RewardClass::kCodeSandbox:
      return "code_sandbox";
    case RewardClass::kLlmJudge:
      return "llm_judge";
  }
  return "unknown";
}

RewardClass ParseRewardClass(const std::string &name) {
  if (name == "rule_based") return RewardClass::kRuleBased;
  if (name == "code_sandbox") return RewardClass::kCodeSandbox;
  if (name == "llm_judge") return RewardClass::kLlmJudge;
  throw InvalidArgument("unknown reward class '" + name + "'");
}

void TaskSpec::Validate() const {
  if (tag.empty()) throw InvalidArgument("task tag must be non-empty");
  if (turns.min() < 1) throw InvalidArgument("task '" + tag + "': turns must be >= 1");
  if (initial_prompt_tokens.min() < 1 || prompt_tokens_per_turn.min() < 1 ||
      response_tokens_per_turn.min() < 1) {
    throw InvalidArgument("task '" + tag + "': token counts must be >= 1");
  }
  if (!(weight > 0.0)) throw InvalidArgument("task '" + tag + "': weight must be positive");
}

}  // namespace rollsim::workload
