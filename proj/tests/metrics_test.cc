// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rollsim/common/error.h"
#include "rollsim/metrics/export.h"
#include "rollsim/metrics/metrics.h"
#include "rollsim/metrics/utilization.h"

namespace rollsim::metrics {
namespace {

TEST(BusyTimelineTest, MergesTouchingSpans) {
  BusyTimeline t;
  t.AddBusy(0.0, 1.0);
  t.AddBusy(1.0, 2.0);
  t.AddBusy(1.5, 3.0);
  t.AddBusy(5.0, 6.0);
  t.AddBusy(7.0, 7.0);
  ASSERT_EQ(t.spans().size(), 2u);
  EXPECT_DOUBLE_EQ(t.TotalBusy(), 4.0);
  EXPECT_DOUBLE_EQ(t.BusyWithin(2.5, 5.5), 1.0);
}

TEST(MetricsTest, UtilizationOverWindow) {
  BusyTimeline a, b;
  a.AddBusy(0.0, 5.0);
  b.AddBusy(5.0, 10.0);
  EXPECT_DOUBLE_EQ(Utilization(a, 0.0, 10.0), 0.5);
  EXPECT_DOUBLE_EQ(Utilization(a, 0.0, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(Utilization({&a, &b}, 0.0, 20.0), 0.25);
  EXPECT_DOUBLE_EQ(Utilization(std::vector<const BusyTimeline *>{}, 0.0, 1.0), 0.0);
  EXPECT_THROW(Utilization(a, 3.0, 3.0), InvalidArgument);
}

TEST(MetricsTest, ThroughputCountsPromptAndResponse) {
  EXPECT_DOUBLE_EQ(Throughput(300, 700, 4.0), 250.0);
  EXPECT_THROW(Throughput(1, 1, 0.0), InvalidArgument);
}

train::PhaseReport Report(int64_t step, double start, double stall, double train, double sync) {
  train::PhaseReport r;
  r.step = step;
  r.start = start;
  r.get_batch_stall = stall;
  r.train_compute = train;
  r.suspend_window = sync;
  r.step_time = stall + train + sync + 0.25;
  r.idle = 0.25;
  r.end = start + r.step_time;
  r.rollout_time = stall;
  r.stale_aborts = step;
  return r;
}

TEST(MetricsTest, AccountedTimeClosesStep) {
  const auto r = Report(0, 0.0, 3.0, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(AccountedTime(r), r.step_time);
}

TEST(MetricsTest, RunSummarySkipsWarmup) {
  std::vector<StepReport> reports;
  reports.push_back({Report(0, 0.0, 10.0, 1.0, 1.0), 1.0, {}});
  reports.push_back({Report(1, 12.25, 2.0, 1.0, 1.0), 3.0, {}});
  reports.push_back({Report(2, 16.5, 2.0, 1.0, 1.0), 5.0, {}});
  const auto all = RunSummary::From(reports);
  EXPECT_EQ(all.steps, 3);
  EXPECT_DOUBLE_EQ(all.makespan, 20.75);
  EXPECT_EQ(all.stale_aborts, 3);
  const auto steady = RunSummary::From(reports, 1);
  EXPECT_DOUBLE_EQ(steady.mean_step_time, 4.25);
  EXPECT_DOUBLE_EQ(steady.mean_throughput, 4.0);
  EXPECT_DOUBLE_EQ(steady.mean_rollout_time, 2.0);
  EXPECT_DOUBLE_EQ(RunSummary::From(reports, 10).mean_throughput, 3.0);
  EXPECT_EQ(RunSummary::From({}).steps, 0);
}

size_t Fields(const std::string &line) { return std::count(line.begin(), line.end(), ',') + 1; }

TEST(ExportTest, StepCsvRowsMatchHeader) {
  StepReport r{Report(3, 1.0, 2.0, 3.0, 4.0), 12.5, {{"train", 0.5}}};
  const std::vector<std::string> pools = {"train", "rollout"};
  const KeyColumns keys = {{"axis", "alpha"}, {"value", "2"}};
  const std::string header = StepCsvHeader(pools, keys);
  const std::string row = StepCsvRow(r, pools, keys);
  EXPECT_EQ(Fields(header), Fields(row));
  EXPECT_EQ(header.rfind("axis,value,step,start", 0), 0u);
  EXPECT_EQ(row.rfind("alpha,2,3,1.000000000,", 0), 0u);
  EXPECT_NE(header.find("util_rollout"), std::string::npos);
  // Missing utilization and first-token fields stay empty.
  EXPECT_EQ(row.substr(row.size() - 13), ",0.500000000,");
  std::ostringstream os;
  WriteStepCsv(os, {r, r}, pools);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(ExportTest, FixedNineDecimals) {
  EXPECT_EQ(Fixed9(1.5), "1.500000000");
  EXPECT_EQ(Fixed9(0.0), "0.000000000");
  EXPECT_EQ(Fixed9(1e-10), "0.000000000");
}

TEST(ExportTest, PhaseSpansCsv) {
  std::ostringstream os;
  WritePhaseSpansCsv(os, {{0, "get_batch", 0.0, 2.5}});
  EXPECT_EQ(os.str(), "step,phase,start,end,duration\n0,get_batch,0.000000000,2.500000000,2.500000000\n");
}

TEST(ExportTest, WriteFileCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "rollsim_metrics_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  WriteFile(dir / "x.txt", "hello\n");
  std::ifstream in(dir / "x.txt");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "hello");
  std::filesystem::remove_all(dir.parent_path());
}

TEST(ExportTest, SummaryTableListsSteps) {
  std::ostringstream os;
  WriteSummaryTable(os, {{Report(0, 0.0, 1.0, 1.0, 1.0), 2.0, {}}});
  EXPECT_NE(os.str().find("mean step 3.250 s"), std::string::npos);
}

}  // namespace
}  // namespace rollsim::metrics
