// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/reward/reward_service.h"

#include <algorithm>
#include <memory>

#include "rollsim/common/error.h"
#include "rollsim/sim/random.h"
#include "rollsim/workload/perf_model.h"

namespace rollsim::reward {

double PseudoReward(uint64_t trajectory_id, workload::RewardClass cost_class) {
  const uint64_t h =
      sim::Mix64(trajectory_id ^ sim::Fnv1a64(workload::RewardClassName(cost_class)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

const char *RewardModeName(RewardMode m) {
  return m == RewardMode::kServerless ? "serverless" : "dedicated";
}

RewardMode ParseRewardMode(const std::string &name) {
  if (name == "serverless") return RewardMode::kServerless;
  if (name == "dedicated") return RewardMode::kDedicated;
  throw InvalidArgument("unknown reward mode '" + name + "'");
}

void RewardServiceConfig::Validate() const {
  std::vector<std::string> diags;
  if (max_instances < 1) diags.push_back("reward.max_instances: must be >= 1");
  if (!sim::IsValidDuration(cold_start)) diags.push_back("reward.cold_start: must be >= 0");
  if (!sim::IsValidDuration(idle_timeout) || idle_timeout <= 0) {
    diags.push_back("reward.idle_timeout: must be > 0");
  }
  if (queue_cap < 0) diags.push_back("reward.queue_cap: must be >= 0");
  if (!sim::IsValidDuration(rule_based_time)) diags.push_back("reward.rule_based_time: must be >= 0");
  if (!diags.empty()) throw ValidationError(std::move(diags));
  judge_model.Validate();
  judge_hw.Validate();
}

RewardService::RewardService(sim::Kernel &kernel, std::string name, RewardServiceConfig config)
    : kernel_(kernel), name_(std::move(name)), config_(std::move(config)) {
  config_.Validate();
  actor_ = kernel_.RegisterActor("reward/" + name_);
  if (config_.mode == RewardMode::kDedicated) {
    for (int64_t i = 0; i < config_.max_instances; ++i) {
      Instance inst;
      inst.id = next_instance_++;
      inst.warm = true;
      inst.provisioned_at = kernel_.Now();
      instances_.push_back(inst);
    }
  }
  Record();
}

sim::SimTime RewardService::ServiceTime(uint64_t trajectory_id, workload::RewardClass cost_class,
                                        int64_t payload_tokens) const {
  switch (cost_class) {
    case workload::RewardClass::kRuleBased:
      return config_.rule_based_time;
    case workload::RewardClass::kCodeSandbox: {
      auto stream = kernel_.Stream("reward/" + std::to_string(trajectory_id));
      return config_.sandbox_time.Sample(stream);
    }
    case workload::RewardClass::kLlmJudge:
      return workload::PrefillTime(std::max<int64_t>(1, payload_tokens), config_.judge_model,
                                   config_.judge_hw);
  }
  return 0.0;
}

void RewardService::Invoke(RewardRequest request) {
  if (config_.queue_cap > 0 && static_cast<int64_t>(queue_.size()) >= config_.queue_cap) {
    ++throttled_;
    RewardOutcome out;
    out.ok = false;
    out.throttled = true;
    out.error = "throttled: queue full";
    auto cb = request.callback;
    kernel_.Schedule(0.0, request.reply_to, "reward_throttled", [cb, out]() { cb(out); },
                     "traj=" + std::to_string(request.trajectory_id));
    return;
  }
  queue_.push_back(Job{std::move(request), kernel_.Now()});
  Dispatch();
}

void RewardService::Invoke(const nlohmann::json &input,
                           std::function<void(const cluster::ServerlessResult &)> done) {
  RewardRequest req;
  try {
    req.trajectory_id = input.at("trajectory_id").get<uint64_t>();
    req.task_tag = input.value("task_tag", std::string());
    req.cost_class = workload::ParseRewardClass(input.value("cost_class", std::string("rule_based")));
    req.payload_tokens = input.value("payload_tokens", int64_t{0});
  } catch (const std::exception &e) {
    cluster::ServerlessResult r;
    r.ok = false;
    r.error = std::string("bad reward request: ") + e.what();
    kernel_.Schedule(0.0, actor_, "reward_rejected", [done, r]() { done(r); });
    return;
  }
  req.reply_to = actor_;
  req.callback = [done](const RewardOutcome &o) {
    cluster::ServerlessResult r;
    r.ok = o.ok;
    r.error = o.error;
    r.output = {{"reward", o.reward}, {"latency", o.latency}, {"throttled", o.throttled}};
    done(r);
  };
  Invoke(std::move(req));
}

RewardService::Instance *RewardService::FindInstance(uint64_t id) {
  for (auto &inst : instances_) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

void RewardService::Dispatch() {
  for (auto &inst : instances_) {
    if (queue_.empty()) break;
    if (inst.warm && !inst.busy) {
      Job job = std::move(queue_.front());
      queue_.pop_front();
      StartJob(inst, std::move(job));
    }
  }
  if (config_.mode == RewardMode::kDedicated) {
    Record();
    return;
  }
  const auto starting = static_cast<size_t>(
      std::count_if(instances_.begin(), instances_.end(), [](const Instance &i) { return !i.warm; }));
  size_t launching = starting;
  while (queue_.size() > launching &&
         static_cast<int64_t>(instances_.size()) < config_.max_instances) {
    Instance inst;
    inst.id = next_instance_++;
    inst.provisioned_at = kernel_.Now();
    instances_.push_back(inst);
    ++cold_starts_;
    ++launching;
    const uint64_t id = inst.id;
    kernel_.Schedule(config_.cold_start, actor_, "cold_start_done",
                     [this, id]() {
                       Instance *i = FindInstance(id);
                       if (i == nullptr) return;
                       i->warm = true;
                       Dispatch();
                       i = FindInstance(id);
                       if (i != nullptr && !i->busy) ArmIdle(*i);
                     },
                     "instance=" + std::to_string(id));
  }
  Record();
}

void RewardService::StartJob(Instance &inst, Job job) {
  if (inst.idle_timer) {
    kernel_.Cancel(*inst.idle_timer);
    inst.idle_timer.reset();
  }
  inst.busy = true;
  const sim::SimTime duration =
      ServiceTime(job.request.trajectory_id, job.request.cost_class, job.request.payload_tokens);
  const sim::SimTime start = kernel_.Now();
  busy_spans_.emplace_back(start, start + duration);
  const uint64_t id = inst.id;
  auto shared = std::make_shared<Job>(std::move(job));
  kernel_.Schedule(duration, actor_, "reward_done",
                   [this, id, shared]() {
                     ++served_;
                     RewardOutcome out;
                     out.reward = PseudoReward(shared->request.trajectory_id,
                                               shared->request.cost_class);
                     out.latency = kernel_.Now() - shared->enqueued;
                     auto cb = shared->request.callback;
                     kernel_.Schedule(0.0, shared->request.reply_to, "reward_reply",
                                      [cb, out]() { cb(out); },
                                      "traj=" + std::to_string(shared->request.trajectory_id));
                     Instance *i = FindInstance(id);
                     i->busy = false;
                     Dispatch();
                     i = FindInstance(id);
                     if (i != nullptr && !i->busy) ArmIdle(*i);
                   },
                   "traj=" + std::to_string(shared->request.trajectory_id));
}

void RewardService::ArmIdle(Instance &inst) {
  if (config_.mode == RewardMode::kDedicated) return;
  if (inst.idle_timer) kernel_.Cancel(*inst.idle_timer);
  const uint64_t id = inst.id;
  inst.idle_timer = kernel_.Schedule(
      config_.idle_timeout, actor_, "scale_down",
      [this, id]() {
        auto it = std::find_if(instances_.begin(), instances_.end(),
                               [id](const Instance &i) { return i.id == id; });
        if (it == instances_.end() || it->busy) return;
        provisioned_.emplace_back(it->provisioned_at, kernel_.Now());
        instances_.erase(it);
        Record();
      },
      "instance=" + std::to_string(id));
  Record();
}

void RewardService::Record() {
  const auto busy = std::count_if(instances_.begin(), instances_.end(),
                                  [](const Instance &i) { return i.busy; });
  const InstanceSample s{kernel_.Now(), static_cast<int64_t>(instances_.size()),
                         static_cast<int64_t>(busy)};
  if (!series_.empty() && series_.back().time == s.time) {
    series_.back() = s;
  } else if (series_.empty() || series_.back().instances != s.instances ||
             series_.back().busy != s.busy) {
    series_.push_back(s);
  }
}

double RewardService::BusyWithin(sim::SimTime from, sim::SimTime to) const {
  double total = 0.0;
  for (const auto &[a, b] : busy_spans_) {
    const double lo = std::max(from, a);
    const double hi = std::min(to, b);
    if (hi > lo) total += hi - lo;
  }
  return total;
}

double RewardService::ProvisionedWithin(sim::SimTime from, sim::SimTime to) const {
  double total = 0.0;
  auto add = [&](sim::SimTime a, sim::SimTime b) {
    const double lo = std::max(from, a);
    const double hi = std::min(to, b);
    if (hi > lo) total += hi - lo;
  };
  for (const auto &[a, b] : provisioned_) add(a, b);
  for (const auto &inst : instances_) add(inst.provisioned_at, to);
  return total;
}

double RewardService::Utilization(sim::SimTime from, sim::SimTime to) const {
  if (!(to > from)) throw InvalidArgument("utilization: empty window");
  const double busy = BusyWithin(from, to);
  if (config_.mode == RewardMode::kDedicated) {
    return busy / ((to - from) * static_cast<double>(config_.max_instances));
  }
  const double provisioned = ProvisionedWithin(from, to);
  return provisioned > 0.0 ? busy / provisioned : 0.0;
}

}  // namespace rollsim::reward
