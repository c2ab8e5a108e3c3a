// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rollsim/common/error.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/link_model.h"
#include "rollsim/workload/model_spec.h"
#include "rollsim/workload/perf_model.h"
#include "rollsim/workload/task_spec.h"
#include "test_util.h"

namespace rollsim::workload {
namespace {

ModelSpec EightB() { return ModelSpec{"8b", 8e9, 2.0, 131072.0}; }

TEST(PerfModelTest, PrefillMatchesHandArithmetic) {
  // 1000 * 2 * 8e9 / (989.5e12 * 0.4) and / (148e12 * 0.4).
  EXPECT_NEAR(PrefillTime(1000, EightB(), H800()), 1.6e13 / 3.958e14, 1e-12);
  EXPECT_NEAR(PrefillTime(1000, EightB(), H800()), 0.0404, 1e-4);
  EXPECT_NEAR(PrefillTime(1000, EightB(), H20()), 0.270, 1e-3);
  EXPECT_NEAR(PrefillTime(1000, EightB(), H20()) / PrefillTime(1000, EightB(), H800()),
              989.5 / 148.0, 1e-9);
}

TEST(PerfModelTest, PrefixDiscountScalesLinearly) {
  EXPECT_NEAR(PrefillTime(1000, EightB(), H800(), 0.25), 0.25 * PrefillTime(1000, EightB(), H800()),
              1e-15);
  EXPECT_THROW(PrefillTime(10, EightB(), H800(), 0.0), InvalidArgument);
}

TEST(PerfModelTest, DecodeFloorAndCrossover) {
  // 16e9 weight bytes over 4e12 * 0.6 and 3.35e12 * 0.6.
  EXPECT_NEAR(DecodeStepTime(1, EightB(), H20()), 16e9 / 2.4e12, 1e-12);
  EXPECT_NEAR(DecodeStepTime(1, EightB(), H800()), 16e9 / 2.01e12, 1e-12);
  EXPECT_LT(DecodeStepTime(1, EightB(), H20()), DecodeStepTime(1, EightB(), H800()));

  const double crossover = DecodeCrossoverBatch(EightB(), H800());
  EXPECT_NEAR(crossover, 16e9 * 3.958e14 / (2 * 8e9 * 2.01e12), 1e-6);
  const auto big = static_cast<int64_t>(std::ceil(crossover)) + 10;
  EXPECT_NEAR(DecodeStepTime(2 * big, EightB(), H800()), 2 * DecodeStepTime(big, EightB(), H800()),
              1e-12);
  EXPECT_DOUBLE_EQ(DecodeStepTime(big / 4, EightB(), H800()), DecodeStepTime(1, EightB(), H800()));
}

TEST(PerfModelTest, DecodeRejectsKvOverflow) {
  const double budget = KvBudgetBytes(EightB(), H800());
  const auto too_many = static_cast<int64_t>(budget / EightB().kv_bytes_per_token) + 1;
  EXPECT_THROW(DecodeStepTime(1, EightB(), H800(), too_many), CapacityError);
  EXPECT_NO_THROW(DecodeStepTime(1, EightB(), H800(), too_many - 2));
}

TEST(PerfModelTest, TrainStepScalesWithPool) {
  const std::vector<HardwareProfile> pool32(32, H800());
  const std::vector<HardwareProfile> pool64(64, H800());
  EXPECT_NEAR(TrainStepTime(1000000, EightB(), pool32), 1e6 * 4.8e10 / (32 * 3.958e14), 1e-9);
  EXPECT_NEAR(TrainStepTime(1000000, EightB(), pool32), 3.79, 0.01);
  EXPECT_DOUBLE_EQ(TrainStepTime(1000000, EightB(), pool64) * 2,
                   TrainStepTime(1000000, EightB(), pool32));
  EXPECT_EQ(TrainStepTime(0, EightB(), pool32), 0.0);
  EXPECT_THROW(TrainStepTime(1, EightB(), std::vector<HardwareProfile>{}), InvalidArgument);
}

TEST(PerfModelTest, AffinityDirectionForBuiltinModels) {
  for (const char *name : {"Qwen3-8B", "Qwen3-14B", "Qwen3-32B"}) {
    const ModelSpec m = *BuiltinModel(name);
    EXPECT_LT(PrefillTime(512, m, H800()), PrefillTime(512, m, H20())) << name;
    EXPECT_LT(DecodeStepTime(1, m, H20()), DecodeStepTime(1, m, H800())) << name;
  }
}

TEST(ModelSpecTest, ValidationAndBuiltins) {
  EXPECT_THROW((ModelSpec{"zero", 0.0, 2.0, 1.0}.Validate()), InvalidArgument);
  EXPECT_THROW((ModelSpec{"kv", 1e9, 2.0, 0.0}.Validate()), InvalidArgument);
  EXPECT_NEAR(BuiltinModel("Qwen3-32B")->weight_bytes() / kGiB, 61.02, 1e-9);
  EXPECT_FALSE(BuiltinModel("nope").has_value());
}

TEST(HardwareTest, ScalingAndValidation) {
  const HardwareProfile h = H20().Scaled(4);
  EXPECT_DOUBLE_EQ(h.tflops, 4 * 148.0);
  EXPECT_DOUBLE_EQ(h.hbm_bytes, 4 * 96e9);
  EXPECT_DOUBLE_EQ(h.nvlink_bw, H20().nvlink_bw);
  HardwareProfile bad = H800();
  bad.mfu = 1.5;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
  bad = H800();
  bad.hbm_bw = 0;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
}

TEST(LinkModelTest, CalibrationMatchesIndependentLeastSquares) {
  const auto rows = test::TransferTableRows();
  for (const auto &[name, samples] : rows) {
    const LinkFit fit = CalibrateLink(name, samples);
    const auto [intercept, slope] = test::OlsOracle(samples);
    EXPECT_NEAR(fit.model.fixed_overhead, intercept, 1e-9) << name;
    EXPECT_NEAR(1.0 / fit.model.eff_bandwidth, slope, 1e-15) << name;
    for (size_t i = 0; i < samples.size(); ++i) {
      EXPECT_LE(std::abs(fit.relative_residuals[i]), 0.15) << name << " row " << i;
    }
  }
}

TEST(LinkModelTest, RdmaBaseline) {
  const auto rows = test::TransferTableRows();
  const LinkFit fit = CalibrateLink("RDMA", rows.at("RDMA"));
  // Exact least-squares over the three RDMA rows (sizes in GiB).
  EXPECT_NEAR(fit.model.fixed_overhead, 3.746, 0.001);
  EXPECT_NEAR(fit.model.eff_bandwidth / kGiB, 10.942, 0.001);
}

TEST(LinkModelTest, SingularAndTooFewSamplesRejected) {
  const std::vector<TransferSample> same = {{1e9, 1.0}, {1e9, 2.0}};
  EXPECT_THROW(CalibrateLink("x", same), InvalidArgument);
  const std::vector<TransferSample> one = {{1e9, 1.0}};
  EXPECT_THROW(CalibrateLink("x", one), InvalidArgument);
}

TEST(TaskSpecTest, ValidationAndRewardClassNames) {
  TaskSpec t;
  t.tag = "swe";
  EXPECT_NO_THROW(t.Validate());
  t.tag = "";
  EXPECT_THROW(t.Validate(), InvalidArgument);
  EXPECT_EQ(ParseRewardClass("llm_judge"), RewardClass::kLlmJudge);
  EXPECT_STREQ(RewardClassName(RewardClass::kCodeSandbox), "code_sandbox");
  EXPECT_THROW(ParseRewardClass("oracle"), InvalidArgument);
}

}  // namespace
}  // namespace rollsim::workload
