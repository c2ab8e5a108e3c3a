// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rollsim/scenario/simulation.h"

namespace rollsim::scenario {

enum class SweepAxis { kAlpha, kSigma, kRedundancy, kParadigm, kAffinity };

SweepAxis ParseSweepAxis(const std::string &name);
const char *SweepAxisName(SweepAxis axis);

/// Returns a copy of `doc` with the axis set to `value`. Throws
/// InvalidArgument when the axis does not apply to the scenario: alpha needs
/// an async paradigm, sigma needs Gaussian env-step latency on every task and
/// redundancy 1, redundancy needs trajectory mode, affinity needs more than
/// one inference pool.
nlohmann::json ApplyAxis(const nlohmann::json &doc, SweepAxis axis, const std::string &value);

struct SweepPoint {
  std::string value;
  /// "trajectory" or "batch" for the sigma axis, empty otherwise.
  std::string variant;
  RunResult result;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kAlpha;
  std::vector<SweepPoint> points;

  /// One row per (value, variant, step) with the step columns of a run.
  std::string MergedCsv() const;
  /// Sigma axis only: batch over trajectory mean rollout time per value.
  std::vector<std::pair<std::string, double>> Speedups() const;
};

/// One run per value with the scenario's seed (or `seed` when given). The
/// sigma axis runs each value in both rollout modes. Runs use independent
/// kernels and execute on up to `jobs` threads; results keep value order.
SweepResult Sweep(const nlohmann::json &doc, SweepAxis axis, const std::vector<std::string> &values,
                  std::optional<uint64_t> seed = std::nullopt, int jobs = 1,
                  RunOptions options = {});

}  // namespace rollsim::scenario
