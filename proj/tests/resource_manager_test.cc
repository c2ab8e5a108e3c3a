// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rollsim/common/error.h"
#include "rollsim/resource/resource_manager.h"
#include "rollsim/sim/random.h"

namespace rollsim::resource {
namespace {

TEST(ResourceManagerTest, CreatesPoolsAndRejectsDuplicates) {
  ResourceManager rm({{"H800", 8}, {"H20", 24}});
  EXPECT_EQ(rm.pool("H800").capacity, 8);
  EXPECT_EQ(rm.pool("H20").capacity, 24);
  EXPECT_EQ(rm.pool_labels(), (std::vector<std::string>{"H800", "H20"}));
  ResourceManager empty;
  EXPECT_TRUE(empty.pool_labels().empty());
  EXPECT_THROW(ResourceManager({{"H800", 8}, {"H800", 4}}), InvalidArgument);
  EXPECT_THROW(empty.AddPool("x", -1), InvalidArgument);
}

TEST(ResourceManagerTest, AllocationExhaustsCapacity) {
  ResourceManager rm({{"H800", 8}});
  rm.Allocate("a", WorkerRole::kInference, "H800", 4);
  rm.Allocate("b", WorkerRole::kInference, "H800", 4);
  try {
    rm.Allocate("c", WorkerRole::kInference, "H800", 1);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError &e) {
    EXPECT_EQ(e.free(), 0);
  }
  EXPECT_THROW(rm.Allocate("d", WorkerRole::kInference, "TPU", 1), NotFound);
  EXPECT_THROW(rm.Allocate("a", WorkerRole::kInference, "H800", 0), InvalidArgument);
}

TEST(ResourceManagerTest, ZeroDeviceBindingIsValid) {
  ResourceManager rm({{"cpu", 0}});
  const auto &b = rm.Allocate("env-0", WorkerRole::kEnvironment, "cpu", 0);
  EXPECT_EQ(b.device_count, 0);
  EXPECT_TRUE(rm.IsAlive("env-0"));
  EXPECT_EQ(rm.pool("cpu").free(), 0);
}

TEST(ResourceManagerTest, FailRestartKeepsSlot) {
  ResourceManager rm({{"H20", 4}});
  rm.Allocate("w", WorkerRole::kInference, "H20", 2);
  EXPECT_EQ(rm.MarkFailed("w"), WorkerStatus::kRestarting);
  EXPECT_EQ(rm.pool("H20").free(), 2);
  EXPECT_FALSE(rm.IsAlive("w"));
  EXPECT_EQ(rm.Restart("w"), WorkerStatus::kAlive);
  EXPECT_EQ(rm.binding("w").pool_label, "H20");
  EXPECT_EQ(rm.pool("H20").allocated.at("w"), 2);
}

TEST(ResourceManagerTest, SecondFailureRemovesAndReturnsCapacity) {
  ResourceManager rm({{"H20", 4}});
  rm.Allocate("w", WorkerRole::kInference, "H20", 2);
  rm.MarkFailed("w");
  rm.Restart("w");
  EXPECT_EQ(rm.MarkFailed("w"), WorkerStatus::kRemoved);
  EXPECT_EQ(rm.pool("H20").free(), 4);
  EXPECT_FALSE(rm.IsAlive("w"));
}

TEST(ResourceManagerTest, HealthyReportResetsFailureCount) {
  ResourceManager rm({{"H20", 4}});
  rm.Allocate("w", WorkerRole::kInference, "H20", 2);
  rm.MarkFailed("w");
  rm.Restart("w");
  rm.ReportHealthy("w");
  EXPECT_EQ(rm.MarkFailed("w"), WorkerStatus::kRestarting);
}

TEST(ResourceManagerTest, RestartOfAliveWorkerIsNoop) {
  ResourceManager rm({{"H20", 4}});
  rm.Allocate("w", WorkerRole::kInference, "H20", 1);
  const size_t journal = rm.journal().size();
  EXPECT_EQ(rm.Restart("w"), WorkerStatus::kAlive);
  EXPECT_EQ(rm.journal().size(), journal);
  EXPECT_THROW(rm.Restart("ghost"), NotFound);
  EXPECT_THROW(rm.MarkFailed("ghost"), NotFound);
}

TEST(ResourceManagerTest, ConservationUnderRandomOperations) {
  ResourceManager rm({{"a", 16}, {"b", 7}});
  const std::map<std::string, int64_t> capacity = {{"a", 16}, {"b", 7}};
  std::map<std::string, std::pair<std::string, int64_t>> held;  // reference counter
  sim::RandomStream rng(99, "ops");
  for (int i = 0; i < 5000; ++i) {
    const std::string id = "w" + std::to_string(rng.UniformInt(0, 11));
    const std::string pool = rng.UniformInt(0, 1) == 0 ? "a" : "b";
    switch (rng.UniformInt(0, 4)) {
      case 0:
        try {
          const int64_t n = rng.UniformInt(0, 5);
          rm.Allocate(id, WorkerRole::kInference, pool, n);
          if (n > 0) held[id] = {pool, n};
        } catch (const Error &) {
        }
        break;
      case 1:
        if (rm.HasWorker(id)) {
          rm.Release(id);
          held.erase(id);
        }
        break;
      case 2:
        if (rm.HasWorker(id) && rm.MarkFailed(id) == WorkerStatus::kRemoved) held.erase(id);
        break;
      case 3:
        if (rm.HasWorker(id)) rm.Restart(id);
        break;
      default:
        if (rm.HasWorker(id)) rm.ReportHealthy(id);
    }
    for (const auto &[label, cap] : capacity) {
      int64_t expect = 0;
      for (const auto &[w, h] : held) expect += h.first == label ? h.second : 0;
      ASSERT_EQ(rm.pool(label).used(), expect);
      ASSERT_EQ(rm.pool(label).used() + rm.pool(label).free(), cap);
    }
  }
}

TEST(ResourceManagerTest, SnapshotListsPoolsBindingsTransitions) {
  ResourceManager rm({{"H800", 8}});
  rm.SetClock(3.0);
  rm.Allocate("t", WorkerRole::kTrain, "H800", 8);
  const auto snap = rm.Snapshot();
  EXPECT_EQ(snap["pools"][0]["free"], 0);
  EXPECT_EQ(snap["bindings"][0]["role"], "train");
  EXPECT_EQ(snap["transitions"][0]["event"], "allocate");
  EXPECT_EQ(snap["transitions"][0]["time"], 3.0);
}

}  // namespace
}  // namespace rollsim::resource
