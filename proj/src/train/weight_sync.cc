// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/train/weight_sync.h"

#include <algorithm>
#include <cmath>

#include "rollsim/common/error.h"

namespace rollsim::train {

WeightStore::WeightStore(double weight_bytes, std::vector<SyncTarget> targets,
                         std::vector<StoreOutage> outages, sim::SimTime backoff_base)
    : weight_bytes_(weight_bytes),
      targets_(std::move(targets)),
      outages_(std::move(outages)),
      backoff_base_(backoff_base) {
  Validate();
  std::sort(outages_.begin(), outages_.end(),
            [](const StoreOutage &a, const StoreOutage &b) { return a.start < b.start; });
}

void WeightStore::Validate() const {
  if (!(weight_bytes_ > 0)) throw InvalidArgument("weight store: weight bytes must be > 0");
  if (targets_.empty()) throw InvalidArgument("weight store: at least one inference pool");
  for (const auto &t : targets_) {
    t.link.Validate();
    if (!(t.broadcast_bw > 0)) {
      throw InvalidArgument("weight store: pool '" + t.pool + "' needs a positive broadcast bandwidth");
    }
  }
  for (const auto &o : outages_) {
    if (!sim::IsValidDuration(o.start) || !(o.end > o.start) || !std::isfinite(o.end)) {
      throw InvalidArgument("weight store: outage must satisfy 0 <= start < end");
    }
  }
  if (!(backoff_base_ > 0)) throw InvalidArgument("weight store: backoff must be > 0");
}

const WeightPublication &WeightStore::Publish(uint64_t version, sim::SimTime start) {
  WeightPublication p;
  p.version = version;
  p.bytes = weight_bytes_;
  p.publish_start = start;
  for (const auto &t : targets_) p.publish_end[t.pool] = start + t.link.TransferTime(weight_bytes_);
  return publications_[version] = std::move(p);
}

const WeightPublication &WeightStore::publication(uint64_t version) const {
  auto it = publications_.find(version);
  if (it == publications_.end()) {
    throw NotFound("weight store: version " + std::to_string(version) + " was never published");
  }
  return it->second;
}

sim::SimTime WeightStore::RetryDelay(sim::SimTime now) const {
  sim::SimTime t = now;
  sim::SimTime backoff = backoff_base_;
  for (;;) {
    const auto down = std::find_if(outages_.begin(), outages_.end(), [t](const StoreOutage &o) {
      return t >= o.start && t < o.end;
    });
    if (down == outages_.end()) return t - now;
    t += backoff;
    backoff *= 2.0;
  }
}

SyncBreakdown WeightStore::PlanUpdate(uint64_t version, sim::SimTime now, bool background) const {
  const WeightPublication &pub = publication(version);
  const sim::SimTime retry = RetryDelay(now);
  const sim::SimTime fetch_at = now + retry;
  SyncBreakdown worst;
  bool first = true;
  for (const auto &t : targets_) {
    SyncBreakdown b;
    b.pool = t.pool;
    b.retry = retry;
    b.full_transfer = t.link.TransferTime(weight_bytes_);
    b.residual = background
                     ? std::clamp(pub.publish_end.at(t.pool) - fetch_at, 0.0, b.full_transfer)
                     : b.full_transfer;
    b.completed_fraction = 1.0 - b.residual / b.full_transfer;
    b.broadcast = weight_bytes_ / t.broadcast_bw;
    if (first || b.total() > worst.total()) worst = b;
    first = false;
  }
  return worst;
}

}  // namespace rollsim::train
