// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "rollsim/common/error.h"
#include "rollsim/reward/reward_service.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/model_spec.h"

namespace rollsim::reward {
namespace {

RewardServiceConfig Config(RewardMode mode, int64_t instances) {
  RewardServiceConfig c;
  c.mode = mode;
  c.max_instances = instances;
  c.cold_start = 5.0;
  c.idle_timeout = 10.0;
  c.rule_based_time = 2.0;
  c.judge_model = *workload::BuiltinModel("Qwen3-8B");
  c.judge_hw = workload::H800();
  return c;
}

struct Fixture {
  explicit Fixture(RewardServiceConfig cfg)
      : kernel(1), client(kernel.RegisterActor("client")), svc(kernel, "judge", cfg) {}

  void Call(uint64_t id, double at, workload::RewardClass c = workload::RewardClass::kRuleBased,
            int64_t payload = 0) {
    kernel.Schedule(at, client, "call", [this, id, c, payload]() {
      RewardRequest r;
      r.trajectory_id = id;
      r.cost_class = c;
      r.payload_tokens = payload;
      r.reply_to = client;
      r.callback = [this, id](const RewardOutcome &o) {
        done[id] = kernel.Now();
        outcomes[id] = o;
      };
      svc.Invoke(std::move(r));
    });
  }

  sim::Kernel kernel;
  sim::ActorId client;
  RewardService svc;
  std::map<uint64_t, double> done;
  std::map<uint64_t, RewardOutcome> outcomes;
};

TEST(RewardServiceTest, PseudoRewardIsDeterministicUnitInterval) {
  for (uint64_t id = 0; id < 1000; ++id) {
    const double r = PseudoReward(id, workload::RewardClass::kLlmJudge);
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, 1.0);
    EXPECT_EQ(r, PseudoReward(id, workload::RewardClass::kLlmJudge));
  }
  EXPECT_NE(PseudoReward(1, workload::RewardClass::kLlmJudge),
            PseudoReward(1, workload::RewardClass::kRuleBased));
}

TEST(RewardServiceTest, JudgeCostIsPromptPrefill) {
  Fixture f(Config(RewardMode::kDedicated, 1));
  const double hand = 4000 * 2.0 * workload::BuiltinModel("Qwen3-8B")->params / (989.5e12 * 0.4);
  EXPECT_NEAR(f.svc.ServiceTime(1, workload::RewardClass::kLlmJudge, 4000), hand, 1e-12);
  EXPECT_DOUBLE_EQ(f.svc.ServiceTime(1, workload::RewardClass::kRuleBased, 4000), 2.0);
  const double a = f.svc.ServiceTime(9, workload::RewardClass::kCodeSandbox, 0);
  EXPECT_EQ(a, f.svc.ServiceTime(9, workload::RewardClass::kCodeSandbox, 0));
  EXPECT_GE(a, 0.0);
}

TEST(RewardServiceTest, DedicatedQueuesOnFixedDevices) {
  Fixture f(Config(RewardMode::kDedicated, 2));
  for (uint64_t id = 0; id < 4; ++id) f.Call(id, 0.0);
  f.kernel.RunUntilQuiescent();
  EXPECT_DOUBLE_EQ(f.done[0], 2.0);
  EXPECT_DOUBLE_EQ(f.done[1], 2.0);
  EXPECT_DOUBLE_EQ(f.done[3], 4.0);
  EXPECT_DOUBLE_EQ(f.outcomes[3].latency, 4.0);
  EXPECT_EQ(f.svc.cold_starts(), 0);
  EXPECT_DOUBLE_EQ(f.svc.Utilization(0.0, 8.0), 8.0 / 16.0);
  EXPECT_EQ(f.svc.instances(), 2);
}

TEST(RewardServiceTest, ServerlessColdStartsAndScalesDown) {
  Fixture f(Config(RewardMode::kServerless, 8));
  f.Call(0, 0.0);
  f.Call(1, 1.0);
  f.Call(2, 8.0);
  f.kernel.RunUntilQuiescent();
  EXPECT_DOUBLE_EQ(f.done[0], 7.0);
  EXPECT_DOUBLE_EQ(f.done[1], 8.0);
  // Instance 0 is idle again at 7 and takes the third call without a cold start.
  EXPECT_DOUBLE_EQ(f.done[2], 10.0);
  EXPECT_EQ(f.svc.cold_starts(), 2);
  EXPECT_EQ(f.svc.instances(), 0);
  // Instance 0 lives [0, 20), instance 1 lives [1, 18).
  EXPECT_DOUBLE_EQ(f.svc.ProvisionedWithin(0.0, 100.0), 20.0 + 17.0);
  EXPECT_DOUBLE_EQ(f.svc.BusyWithin(0.0, 100.0), 6.0);
  EXPECT_DOUBLE_EQ(f.svc.Utilization(0.0, 100.0), 6.0 / 37.0);
  EXPECT_EQ(f.svc.series().back().instances, 0);
}

TEST(RewardServiceTest, ServerlessRespectsInstanceCeiling) {
  Fixture f(Config(RewardMode::kServerless, 2));
  for (uint64_t id = 0; id < 6; ++id) f.Call(id, 0.0);
  f.kernel.RunUntilQuiescent();
  EXPECT_EQ(f.svc.cold_starts(), 2);
  EXPECT_DOUBLE_EQ(f.done[5], 5.0 + 3 * 2.0);
  for (const auto &s : f.svc.series()) EXPECT_LE(s.instances, 2);
}

TEST(RewardServiceTest, QueueCapThrottles) {
  RewardServiceConfig cfg = Config(RewardMode::kDedicated, 1);
  cfg.queue_cap = 1;
  Fixture f(cfg);
  for (uint64_t id = 0; id < 3; ++id) f.Call(id, 0.0);
  f.kernel.RunUntilQuiescent();
  EXPECT_TRUE(f.outcomes[2].throttled);
  EXPECT_FALSE(f.outcomes[2].ok);
  EXPECT_DOUBLE_EQ(f.done[2], 0.0);
  EXPECT_TRUE(f.outcomes[1].ok);
  EXPECT_EQ(f.svc.throttled(), 1);
}

TEST(RewardServiceTest, EndpointFormRejectsMalformedInput) {
  Fixture f(Config(RewardMode::kServerless, 1));
  cluster::ServerlessResult bad, good;
  f.svc.Invoke(nlohmann::json{{"task_tag", "x"}}, [&](const cluster::ServerlessResult &r) { bad = r; });
  f.svc.Invoke(nlohmann::json{{"trajectory_id", 4}, {"cost_class", "rule_based"}},
               [&](const cluster::ServerlessResult &r) { good = r; });
  f.kernel.RunUntilQuiescent();
  EXPECT_FALSE(bad.ok);
  EXPECT_TRUE(good.ok);
  EXPECT_DOUBLE_EQ(good.output["reward"].get<double>(),
                   PseudoReward(4, workload::RewardClass::kRuleBased));
}

TEST(RewardServiceTest, Validation) {
  EXPECT_THROW(Fixture{Config(RewardMode::kDedicated, 0)}, ValidationError);
  RewardServiceConfig cfg = Config(RewardMode::kServerless, 1);
  cfg.idle_timeout = 0.0;
  EXPECT_THROW(Fixture{cfg}, ValidationError);
  EXPECT_THROW(ParseRewardMode("cloud"), InvalidArgument);
}

}  // namespace
}  // namespace rollsim::reward
