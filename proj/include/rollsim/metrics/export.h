// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rollsim/metrics/metrics.h"
#include "rollsim/rollout/trajectory.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/train/pipeline.h"

namespace rollsim::metrics {

/// Fixed-point with nine decimals, the format of every time column.
std::string Fixed9(double v);

/// (column, value) pairs prepended to each row, e.g. a sweep axis.
using KeyColumns = std::vector<std::pair<std::string, std::string>>;

std::string StepCsvHeader(const std::vector<std::string> &pools, const KeyColumns &keys = {});
std::string StepCsvRow(const StepReport &r, const std::vector<std::string> &pools,
                       const KeyColumns &keys = {});
void WriteStepCsv(std::ostream &out, const std::vector<StepReport> &reports,
                  const std::vector<std::string> &pools, const KeyColumns &keys = {});

void WriteTimelineJsonl(std::ostream &out, const std::vector<sim::TraceRecord> &trace);
void WritePhaseSpansCsv(std::ostream &out, const std::vector<train::PhaseSpan> &spans);
void WriteTrajectoriesJsonl(std::ostream &out, const std::vector<rollout::Trajectory> &trajectories);

/// Human-readable table for stdout.
void WriteSummaryTable(std::ostream &out, const std::vector<StepReport> &reports);

/// Writes `content` to `path`, creating parent directories. Throws Error
/// when the file cannot be written.
void WriteFile(const std::filesystem::path &path, const std::string &content);

}  // namespace rollsim::metrics
