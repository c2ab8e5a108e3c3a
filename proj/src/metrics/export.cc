// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/metrics/export.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rollsim/common/error.h"

namespace rollsim::metrics {

std::string Fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

namespace {

const std::vector<std::string> kStepColumns = {
    "step",          "start",           "end",
    "step_time",     "version",         "deployed_version",
    "trajectories",  "prompt_tokens",   "response_tokens",
    "throughput",    "get_batch_stall", "train_compute",
    "recovery",      "suspend_window",  "drain",
    "store_retry",   "transfer_residual", "broadcast",
    "full_transfer", "publication_completed_fraction", "resume_to_first_token",
    "idle",          "rollout_time",    "stale_aborts",
    "wasted_tokens", "max_staleness",
};

}  // namespace

std::string StepCsvHeader(const std::vector<std::string> &pools, const KeyColumns &keys) {
  std::string line;
  for (const auto &[k, v] : keys) line += k + ",";
  for (size_t i = 0; i < kStepColumns.size(); ++i) {
    if (i > 0) line += ",";
    line += kStepColumns[i];
  }
  for (const auto &p : pools) line += ",util_" + p;
  return line;
}

std::string StepCsvRow(const StepReport &r, const std::vector<std::string> &pools,
                       const KeyColumns &keys) {
  const train::PhaseReport &p = r.phases;
  std::ostringstream os;
  for (const auto &[k, v] : keys) os << v << ",";
  os << p.step << "," << Fixed9(p.start) << "," << Fixed9(p.end) << "," << Fixed9(p.step_time)
     << "," << p.version << "," << p.deployed_version << "," << p.trajectories << ","
     << p.prompt_tokens << "," << p.response_tokens << "," << Fixed9(r.throughput) << ","
     << Fixed9(p.get_batch_stall) << "," << Fixed9(p.train_compute) << "," << Fixed9(p.recovery)
     << "," << Fixed9(p.suspend_window) << "," << Fixed9(p.drain) << "," << Fixed9(p.store_retry)
     << "," << Fixed9(p.transfer_residual) << "," << Fixed9(p.broadcast) << ","
     << Fixed9(p.full_transfer) << "," << Fixed9(p.publication_completed_fraction) << ","
     << (p.resume_to_first_token ? Fixed9(*p.resume_to_first_token) : std::string()) << ","
     << Fixed9(p.idle) << "," << Fixed9(p.rollout_time) << "," << p.stale_aborts << ","
     << p.wasted_tokens << "," << p.max_staleness;
  for (const auto &pool : pools) {
    auto it = r.utilization.find(pool);
    os << "," << (it == r.utilization.end() ? std::string() : Fixed9(it->second));
  }
  return os.str();
}

void WriteStepCsv(std::ostream &out, const std::vector<StepReport> &reports,
                  const std::vector<std::string> &pools, const KeyColumns &keys) {
  out << StepCsvHeader(pools, keys) << "\n";
  for (const auto &r : reports) out << StepCsvRow(r, pools, keys) << "\n";
}

void WriteTimelineJsonl(std::ostream &out, const std::vector<sim::TraceRecord> &trace) {
  for (const auto &rec : trace) out << sim::FormatTraceRecord(rec) << "\n";
}

void WritePhaseSpansCsv(std::ostream &out, const std::vector<train::PhaseSpan> &spans) {
  out << "step,phase,start,end,duration\n";
  for (const auto &s : spans) {
    out << s.step << "," << s.phase << "," << Fixed9(s.start) << "," << Fixed9(s.end) << ","
        << Fixed9(s.end - s.start) << "\n";
  }
}

void WriteTrajectoriesJsonl(std::ostream &out,
                            const std::vector<rollout::Trajectory> &trajectories) {
  for (const auto &t : trajectories) out << rollout::TrajectoryToJson(t).dump() << "\n";
}

void WriteSummaryTable(std::ostream &out, const std::vector<StepReport> &reports) {
  char line[256];
  std::snprintf(line, sizeof(line), "%5s %12s %12s %12s %12s %12s %14s %7s\n", "step", "step_time",
                "stall", "train", "suspend", "rollout", "tokens/s", "stale");
  out << line;
  for (const auto &r : reports) {
    const auto &p = r.phases;
    std::snprintf(line, sizeof(line), "%5lld %12.3f %12.3f %12.3f %12.3f %12.3f %14.1f %7lld\n",
                  static_cast<long long>(p.step), p.step_time, p.get_batch_stall, p.train_compute,
                  p.suspend_window, p.rollout_time, r.throughput,
                  static_cast<long long>(p.stale_aborts));
    out << line;
  }
  const RunSummary s = RunSummary::From(reports);
  std::snprintf(line, sizeof(line), "mean step %.3f s, mean throughput %.1f tokens/s, makespan %.3f s\n",
                s.mean_step_time, s.mean_throughput, s.makespan);
  out << line;
}

void WriteFile(const std::filesystem::path &path, const std::string &content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << content;
  f.flush();
  if (!f) throw Error("write to " + path.string() + " failed");
}

}  // namespace rollsim::metrics
