// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/scenario/simulation.h"

#include <sstream>

#include "rollsim/common/error.h"
#include "rollsim/metrics/export.h"

namespace rollsim::scenario {

namespace {

constexpr const char *kRewardMethod = "compute_reward";

}  // namespace

/// Sends reward requests through the reward cluster's serverless binding.
class Simulation::ServerlessRewardClient : public reward::RewardClient {
 public:
  ServerlessRewardClient(sim::Kernel &kernel, cluster::Cluster &cluster)
      : kernel_(kernel), cluster_(cluster) {}

  void Invoke(reward::RewardRequest request) override {
    nlohmann::json input = {{"trajectory_id", request.trajectory_id},
                            {"task_tag", request.task_tag},
                            {"cost_class", workload::RewardClassName(request.cost_class)},
                            {"payload_tokens", request.payload_tokens}};
    auto cb = request.callback;
    const sim::ActorId reply_to = request.reply_to;
    cluster_.InvokeServerless(kRewardMethod, input,
                              [this, cb, reply_to](const cluster::ServerlessResult &r) {
                                reward::RewardOutcome out;
                                out.ok = r.ok;
                                out.error = r.error;
                                if (r.output.is_object()) {
                                  out.reward = r.output.value("reward", 0.0);
                                  out.latency = r.output.value("latency", 0.0);
                                  out.throttled = r.output.value("throttled", false);
                                }
                                kernel_.Schedule(0.0, reply_to, "reward_result",
                                                 [cb, out]() { cb(out); });
                              });
  }

 private:
  sim::Kernel &kernel_;
  cluster::Cluster &cluster_;
};

Simulation::Simulation(const Scenario &scenario, RunOptions options)
    : scenario_(scenario), options_(options) {
  const Scenario &s = scenario_;
  kernel_ = std::make_unique<sim::Kernel>(
      s.seed, (options_.full_trace || s.full_trace) ? sim::Kernel::TraceMode::kFull
                                                    : sim::Kernel::TraceMode::kDigest);
  for (const auto &p : s.pools) rm_.AddPool(p.label, p.devices);

  // Inference fleet.
  std::vector<proxy::InferenceWorkerSpec> workers;
  std::map<std::string, int64_t> next_index;
  std::vector<train::SyncTarget> targets;
  for (const auto &g : s.inference.workers) {
    const workload::HardwareProfile hw =
        s.PoolHardware(g.pool).WithEfficiency(s.inference.mfu, s.inference.mbu);
    for (int64_t k = 0; k < g.count; ++k) {
      proxy::InferenceWorkerSpec w;
      w.id = g.pool + "-" + std::to_string(next_index[g.pool]++);
      w.pool = g.pool;
      w.devices = g.devices_per_worker;
      w.engine.model = s.model;
      w.engine.hw = hw;
      w.engine.chunk_size = s.inference.chunk_size;
      w.engine.max_running = s.inference.max_running;
      w.engine.prefix_discount = s.inference.prefix_discount;
      workers.push_back(w);
    }
    const bool known = std::any_of(targets.begin(), targets.end(),
                                   [&](const train::SyncTarget &t) { return t.pool == g.pool; });
    if (!known) targets.push_back(train::SyncTarget{g.pool, s.links.at(g.link), hw.nvlink_bw});
  }
  proxy_ = std::make_unique<proxy::LlmProxy>(*kernel_, rm_, workers,
                                             cluster::AffinityTable(s.inference.affinity));
  proxy_->set_keep_step_trace(options_.keep_step_trace);

  // Reward.
  reward_ = std::make_unique<reward::RewardService>(*kernel_, "judge", s.reward.service);
  if (s.reward.service.mode == reward::RewardMode::kDedicated) {
    rm_.Allocate("reward-0", resource::WorkerRole::kReward, s.reward.pool,
                 s.reward.service.max_instances);
    reward_client_ = nullptr;
  } else {
    endpoints_.Register(s.reward.endpoint, reward_.get());
    reward_cluster_ = std::make_unique<cluster::Cluster>(
        *kernel_, rm_, "reward", resource::WorkerRole::kReward,
        std::vector<cluster::WorkerSpec>{}, cluster::Cluster::WorkerFactory{});
    reward_cluster_->RegisterServerless(kRewardMethod, s.reward.endpoint, &endpoints_);
    reward_client_ = std::make_unique<ServerlessRewardClient>(*kernel_, *reward_cluster_);
  }
  reward::RewardClient &reward_client =
      reward_client_ ? *reward_client_ : static_cast<reward::RewardClient &>(*reward_);

  // Rollout and buffer.
  rollout::RolloutConfig rc = s.rollout;
  rc.keep_trajectories = options_.keep_trajectories;
  rollout_ = std::make_unique<rollout::RolloutScheduler>(*kernel_, rc, *proxy_, reward_client);
  buffer_ = std::make_unique<buffer::SampleBuffer>(*kernel_, s.training.paradigm.BufferAlpha(),
                                                   s.rollout.group_size);

  // Trainer.
  const PoolSpec &train_pool = s.pool(s.training.pool);
  rm_.Allocate("trainer-0", resource::WorkerRole::kTrain, train_pool.label, train_pool.devices);
  train::TrainerConfig tc;
  tc.model = s.model;
  tc.devices.assign(static_cast<size_t>(train_pool.devices),
                    s.PoolHardware(train_pool.label).WithEfficiency(s.training.mfu, workload::kDefaultMbu));
  tc.paradigm = s.training.paradigm;
  tc.steps = s.steps;
  tc.groups_per_batch = s.groups;
  tc.group_size = s.rollout.group_size;
  tc.checkpoint_interval = s.training.checkpoint_interval;
  tc.background_publication = s.training.background_publication;
  tc.max_inflight_groups = s.max_inflight_groups;
  tc.finish_then_reject = s.finish_then_reject;
  tc.failures = s.trainer_failures;
  store_ = std::make_unique<train::WeightStore>(s.model.weight_bytes(), targets, s.store_outages,
                                                s.store_backoff);
  train::FleetHooks hooks;
  hooks.suspend_all = [this](std::function<void()> cb) { proxy_->SuspendAll(std::move(cb)); };
  hooks.resume_all = [this]() { proxy_->ResumeAll(); };
  hooks.set_version = [this](uint64_t v) { proxy_->SetVersion(v); };
  hooks.first_token_after_resume = [this]() { return proxy_->FirstDecodeAfterResume(); };
  pipeline_ = std::make_unique<train::Pipeline>(*kernel_, tc, *rollout_, *buffer_, *store_, hooks);

  for (const auto &f : s.inference_failures) {
    const std::string worker = f.worker;
    const sim::SimTime delay = f.restart_delay;
    kernel_->Schedule(f.time, proxy_->engine(worker)->actor(), "inject_failure",
                      [this, worker, delay]() { proxy_->FailWorker(worker, delay); },
                      "worker=" + worker);
  }
}

Simulation::~Simulation() = default;

RunResult Simulation::Run() {
  if (ran_) throw StateError("simulation: Run() may be called once");
  ran_ = true;
  pipeline_->Start();
  kernel_->RunUntilQuiescent();
  if (!pipeline_->finished()) {
    buffer_->CheckNotStalled("no runnable events remain after " +
                             std::to_string(pipeline_->reports().size()) + " steps");
    throw StateError("simulation: trainer stopped early without a pending request");
  }
  pipeline_->CaptureFirstToken();

  RunResult r;
  const Scenario &s = scenario_;
  r.scenario_name = s.name;
  r.scenario_hash = ScenarioHash(s.source);
  r.seed = s.seed;
  r.paradigm = s.training.paradigm.ToString();
  r.alpha = s.training.paradigm.BufferAlpha();

  // Per-pool busy timelines.
  std::map<std::string, std::vector<const metrics::BusyTimeline *>> pool_timelines;
  for (auto *e : proxy_->engines()) {
    pool_timelines[proxy_->cluster().pool_of(e->id())].push_back(&e->busy_timeline());
  }
  r.util_pools.push_back("train");
  for (const auto &[pool, _] : pool_timelines) {
    if (pool != "train") r.util_pools.push_back(pool);
  }
  r.util_pools.push_back("reward");

  auto utilization = [&](const std::string &pool, sim::SimTime from, sim::SimTime to) {
    if (pool == "train") return metrics::Utilization(pipeline_->train_busy(), from, to);
    if (pool == "reward") return reward_->Utilization(from, to);
    return metrics::Utilization(pool_timelines.at(pool), from, to);
  };
  for (const auto &p : pipeline_->reports()) {
    metrics::StepReport sr;
    sr.phases = p;
    sr.throughput = metrics::Throughput(p.prompt_tokens, p.response_tokens, p.step_time);
    for (const auto &pool : r.util_pools) sr.utilization[pool] = utilization(pool, p.start, p.end);
    r.reports.push_back(std::move(sr));
  }
  r.makespan = pipeline_->reports().back().end;
  for (const auto &pool : r.util_pools) r.run_utilization[pool] = utilization(pool, 0.0, r.makespan);

  r.trace_digest = kernel_->trace_digest();
  r.events = kernel_->processed_events();
  r.trace = kernel_->trace();
  r.spans = pipeline_->spans();
  r.trajectories = rollout_->archive();
  r.consumption = buffer_->consumption_log();
  r.occupancy = buffer_->occupancy();
  r.reward_series = reward_->series();
  r.step_trace = proxy_->step_trace();
  r.distributions = pipeline_->distributions();
  r.rollout_stats = rollout_->stats();
  r.buffer_stale_rejects = buffer_->stale_rejects();
  r.buffer_evictions = buffer_->evictions();

  double trn = 0;
  for (const auto &p : r.reports) trn += p.phases.train_compute;
  const auto &st = r.rollout_stats;
  r.phase_totals = {{"env_reset", st.env_reset_time}, {"generation", st.generation_time},
                    {"env_step", st.env_step_time},   {"reward", st.reward_time},
                    {"training", trn}};
  return r;
}

std::string RunResult::StepCsv() const {
  std::ostringstream os;
  metrics::WriteStepCsv(os, reports, util_pools);
  return os.str();
}

nlohmann::json RunResult::Manifest() const {
  nlohmann::json util = nlohmann::json::object();
  for (const auto &[pool, u] : run_utilization) util[pool] = metrics::Fixed9(u);
  nlohmann::json phases = nlohmann::json::object();
  for (const auto &[k, v] : phase_totals) phases[k] = metrics::Fixed9(v);
  const auto summary = metrics::RunSummary::From(reports);
  return {{"scenario", scenario_name},
          {"scenario_hash", scenario_hash},
          {"seed", seed},
          {"paradigm", paradigm},
          {"steps", reports.size()},
          {"makespan", metrics::Fixed9(makespan)},
          {"mean_step_time", metrics::Fixed9(summary.mean_step_time)},
          {"mean_throughput", metrics::Fixed9(summary.mean_throughput)},
          {"mean_rollout_time", metrics::Fixed9(summary.mean_rollout_time)},
          {"events", events},
          {"trace_digest", std::to_string(trace_digest)},
          {"utilization", util},
          {"phase_totals", phases},
          {"stale_aborts", summary.stale_aborts},
          {"wasted_tokens", summary.wasted_tokens},
          {"surplus_aborts", rollout_stats.surplus_aborts},
          {"failure_aborts", rollout_stats.failure_aborts}};
}

RunResult RunScenario(const nlohmann::json &doc, RunOptions options) {
  Simulation sim(Scenario::Parse(doc), options);
  return sim.Run();
}

void WriteArtifacts(const RunResult &result, const std::filesystem::path &dir) {
  metrics::WriteFile(dir / "steps.csv", result.StepCsv());
  {
    std::ostringstream os;
    metrics::WritePhaseSpansCsv(os, result.spans);
    metrics::WriteFile(dir / "phases.csv", os.str());
  }
  {
    std::ostringstream os;
    metrics::WriteTrajectoriesJsonl(os, result.trajectories);
    metrics::WriteFile(dir / "trajectories.jsonl", os.str());
  }
  {
    std::ostringstream os;
    os << "time,trajectories,complete_groups\n";
    for (const auto &o : result.occupancy) {
      os << metrics::Fixed9(o.time) << "," << o.trajectories << "," << o.complete_groups << "\n";
    }
    metrics::WriteFile(dir / "occupancy.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "time,instances,busy\n";
    for (const auto &x : result.reward_series) {
      os << metrics::Fixed9(x.time) << "," << x.instances << "," << x.busy << "\n";
    }
    metrics::WriteFile(dir / "reward_instances.csv", os.str());
  }
  if (!result.trace.empty()) {
    std::ostringstream os;
    metrics::WriteTimelineJsonl(os, result.trace);
    metrics::WriteFile(dir / "timeline.jsonl", os.str());
  }
  metrics::WriteFile(dir / "manifest.json", result.Manifest().dump(2) + "\n");
}

}  // namespace rollsim::scenario
