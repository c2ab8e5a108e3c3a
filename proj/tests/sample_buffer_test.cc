// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "rollsim/buffer/sample_buffer.h"
#include "rollsim/common/error.h"
#include "rollsim/sim/random.h"
#include "test_util.h"

namespace rollsim::buffer {
namespace {

using test::Completed;

TEST(SampleBufferTest, CompleteGroupServesWaitingRequest) {
  sim::Kernel kernel(1);
  SampleBuffer buf(kernel, 1, 2);
  std::vector<rollout::Trajectory> got;
  buf.GetBatch(2, [&](std::vector<rollout::Trajectory> b) { got = std::move(b); });
  EXPECT_EQ(buf.Put(Completed(0, 10, 0)), PutResult::kAccepted);
  EXPECT_EQ(buf.complete_groups(), 0);
  int64_t undelivered_at_put = -1;
  kernel.Schedule(3.0, kernel.RegisterActor("producer"), "put", [&]() {
    buf.Put(Completed(1, 10, 0));
    // Handed to the pending request but not yet delivered.
    undelivered_at_put = buf.undelivered_groups();
  });
  kernel.RunUntilQuiescent();
  EXPECT_EQ(undelivered_at_put, 1);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(buf.undelivered_groups(), 0);
  EXPECT_DOUBLE_EQ(buf.last_stall(), 3.0);
  EXPECT_EQ(buf.size(), 0);
  ASSERT_EQ(buf.consumption_log().size(), 2u);
  EXPECT_EQ(buf.consumption_log()[0].consumer_version, 0u);
}

TEST(SampleBufferTest, OldestCompleteGroupsFirst) {
  sim::Kernel kernel(1);
  auto actor = kernel.RegisterActor("p");
  SampleBuffer buf(kernel, 0, 1);
  kernel.Schedule(1.0, actor, "put", [&]() { buf.Put(Completed(0, 7, 0)); });
  kernel.Schedule(2.0, actor, "put", [&]() { buf.Put(Completed(1, 3, 0)); });
  kernel.Schedule(2.0, actor, "put", [&]() { buf.Put(Completed(2, 1, 0)); });
  kernel.RunUntilQuiescent();
  std::vector<uint64_t> groups;
  buf.GetBatch(3, [&](std::vector<rollout::Trajectory> b) {
    for (const auto &t : b) groups.push_back(t.group_id);
  });
  kernel.RunUntilQuiescent();
  EXPECT_EQ(groups, (std::vector<uint64_t>{7, 1, 3}));
}

TEST(SampleBufferTest, StaleRejectKillsGroup) {
  sim::Kernel kernel(1);
  SampleBuffer buf(kernel, 1, 3);
  std::vector<uint64_t> killed;
  buf.SetGroupKilledListener([&](uint64_t g) { killed.push_back(g); });
  buf.OnVersionAdvance(1);
  buf.OnVersionAdvance(2);
  EXPECT_EQ(buf.Put(Completed(0, 5, 1, 10)), PutResult::kAccepted);
  EXPECT_EQ(buf.Put(Completed(1, 5, 0, 10)), PutResult::kRejectedStale);
  EXPECT_EQ(buf.Put(Completed(2, 5, 2, 10)), PutResult::kDroppedDeadGroup);
  EXPECT_TRUE(buf.IsDead(5));
  EXPECT_EQ(killed, (std::vector<uint64_t>{5}));
  EXPECT_EQ(buf.size(), 0);
  EXPECT_EQ(buf.stale_rejects(), 1);
  EXPECT_EQ(buf.evictions(), 1);
  EXPECT_EQ(buf.dead_group_drops(), 1);
  EXPECT_EQ(buf.discarded_tokens(), 30);
}

TEST(SampleBufferTest, VersionAdvanceEvictsOutOfWindow) {
  sim::Kernel kernel(1);
  SampleBuffer buf(kernel, 2, 2);
  buf.Put(Completed(0, 1, 0));
  buf.Put(Completed(1, 1, 0));
  buf.Put(Completed(2, 2, 1));
  buf.OnVersionAdvance(1);
  EXPECT_TRUE(buf.OnVersionAdvance(2).empty());
  EXPECT_EQ(buf.OnVersionAdvance(3), (std::vector<uint64_t>{0, 1}));
  EXPECT_EQ(buf.size(), 1);
  EXPECT_EQ(buf.complete_groups(), 0);
  EXPECT_THROW(buf.OnVersionAdvance(5), StateError);
}

TEST(SampleBufferTest, AlphaZeroAcceptsOnlyCurrentVersion) {
  sim::Kernel kernel(1);
  SampleBuffer buf(kernel, 0, 1);
  buf.OnVersionAdvance(1);
  EXPECT_EQ(buf.Put(Completed(0, 0, 0)), PutResult::kRejectedStale);
  EXPECT_EQ(buf.Put(Completed(1, 1, 1)), PutResult::kAccepted);
}

TEST(SampleBufferTest, RequestErrors) {
  sim::Kernel kernel(1);
  SampleBuffer buf(kernel, 1, 4);
  EXPECT_THROW(buf.GetBatch(6, [](auto) {}), InvalidArgument);
  EXPECT_THROW(buf.GetBatch(0, [](auto) {}), InvalidArgument);
  buf.GetBatch(4, [](auto) {});
  EXPECT_TRUE(buf.has_pending_request());
  EXPECT_THROW(buf.GetBatch(4, [](auto) {}), StateError);
  EXPECT_THROW(buf.CheckNotStalled("producers idle"), StateError);
  EXPECT_THROW(SampleBuffer(kernel, 1, 0), InvalidArgument);
}

TEST(SampleBufferTest, PutValidatesTrajectory) {
  sim::Kernel kernel(1);
  SampleBuffer buf(kernel, 1, 1);
  rollout::Trajectory t = Completed(0, 0, 0);
  t.reward.reset();
  EXPECT_THROW(buf.Put(t), StateError);
  buf.Put(Completed(1, 0, 0));
  EXPECT_THROW(buf.Put(Completed(2, 0, 0)), StateError);
}

// Randomized producer/consumer: every consumed trajectory honours the bound
// and every batch is made of whole groups.
TEST(SampleBufferTest, RandomizedStalenessAndGroupIntegrity) {
  for (uint64_t alpha : {0u, 1u, 3u}) {
    sim::Kernel kernel(alpha + 1);
    const int64_t g = 3;
    SampleBuffer buf(kernel, alpha, g);
    sim::RandomStream rng(alpha, "buffer");
    uint64_t next_traj = 0;
    std::map<uint64_t, int64_t> members;
    std::vector<std::vector<rollout::Trajectory>> batches;
    for (int op = 0; op < 3000; ++op) {
      const int64_t r = rng.UniformInt(0, 19);
      if (r == 0) {
        buf.OnVersionAdvance(buf.version() + 1);
      } else if (r == 1 && !buf.has_pending_request()) {
        buf.GetBatch(2 * g, [&](std::vector<rollout::Trajectory> b) { batches.push_back(b); });
      } else {
        const uint64_t group = static_cast<uint64_t>(rng.UniformInt(0, 3)) + buf.version() * 10;
        if (members[group] >= g) continue;
        ++members[group];
        const uint64_t lag = static_cast<uint64_t>(rng.UniformInt(0, 4));
        const uint64_t init = buf.version() >= lag ? buf.version() - lag : 0;
        buf.Put(Completed(next_traj++, group, init));
      }
      kernel.RunUntilQuiescent();
    }
    ASSERT_FALSE(batches.empty());
    for (const auto &rec : buf.consumption_log()) {
      EXPECT_LE(rec.consumer_version - rec.init_version, alpha);
    }
    for (const auto &b : batches) {
      std::map<uint64_t, int> per_group;
      for (const auto &t : b) ++per_group[t.group_id];
      for (const auto &[gid, n] : per_group) EXPECT_EQ(n, g) << "group " << gid;
    }
  }
}

}  // namespace
}  // namespace rollsim::buffer
