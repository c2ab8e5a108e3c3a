// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rollsim/buffer/sample_buffer.h"
#include "rollsim/metrics/metrics.h"
#include "rollsim/proxy/inference_engine.h"
#include "rollsim/rollout/rollout_scheduler.h"
#include "rollsim/scenario/scenario.h"
#include "rollsim/scenario/simulation.h"
#include "rollsim/scenario/sweep.h"
#include "rollsim/sim/kernel.h"
#include "rollsim/sim/random.h"
#include "rollsim/workload/hardware.h"
#include "rollsim/workload/link_model.h"
#include "rollsim/workload/perf_model.h"
#include "test_util.h"

namespace rollsim::acceptance {
namespace {

using nlohmann::json;
using scenario::RunOptions;
using scenario::RunResult;
using scenario::SweepAxis;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char *format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

RunOptions Lean() {
  RunOptions o;
  o.keep_trajectories = false;
  return o;
}

// 1. Randomized staleness audit.
Outcome Staleness() {
  sim::RandomStream rng(2026, "staleness_audit");
  int64_t consumed = 0;
  int64_t violations = 0;
  int64_t stale_aborts = 0;
  for (int i = 0; i < 1000; ++i) {
    json doc = test::SmallScenario(8);
    doc["seed"] = 1000 + i;
    doc["steps"] = 3;
    const int64_t alpha = i % 5;
    if (alpha == 0) {
      doc["training"]["paradigm"] = "sync";
    } else if (rng.Uniform() < 0.2) {
      doc["training"]["paradigm"] = "one_off";
    } else {
      doc["training"]["paradigm"] = "async";
      doc["training"]["alpha"] = alpha;
    }
    doc["tasks"][0]["turns"] = {{"uniform", {1, 4}}};
    doc["tasks"][0]["env_step"] = {
        {"lognormal_tail",
         {{"median", 0.5 + 2.5 * rng.Uniform()}, {"p99_over_p50", 2.0 + 13.0 * rng.Uniform()}}},
        {"failure_prob", 0.3 * rng.Uniform()},
        {"failure_penalty", 1.0}};
    const int64_t groups = rng.UniformInt(1, 3);
    doc["rollout"]["groups"] = groups;
    doc["rollout"]["group_size"] = rng.UniformInt(1, 4);
    doc["rollout"]["redundancy"] = rng.Uniform() < 0.3 ? 1.5 : 1.0;
    doc["rollout"]["max_inflight_groups"] = rng.Uniform() < 0.3 ? 0 : rng.UniformInt(groups, 3 * groups);
    doc["rollout"]["finish_then_reject"] = rng.Uniform() < 0.3;
    if (rng.Uniform() < 0.2) {
      doc["faults"] = {{"inference_failures",
                        {{{"worker", "rollout-0"}, {"time", 20.0 * rng.Uniform()},
                          {"restart_delay", 5.0}}}}};
    }
    const RunResult r = scenario::RunScenario(doc, Lean());
    stale_aborts += r.rollout_stats.stale_aborts;
    for (const auto &rec : r.consumption) {
      ++consumed;
      if (rec.init_version > rec.consumer_version ||
          rec.consumer_version - rec.init_version > r.alpha) {
        ++violations;
      }
    }
  }
  return {violations == 0 && consumed > 0,
          std::to_string(consumed) + " consumed trajectories over 1000 scenarios, " +
              std::to_string(violations) + " violations, " + std::to_string(stale_aborts) +
              " stale aborts"};
}

std::map<std::string, std::string> ReadDir(const std::filesystem::path &dir) {
  std::map<std::string, std::string> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    files[entry.path().filename().string()] = os.str();
  }
  return files;
}

// 2. Determinism of every preset.
Outcome Determinism() {
  const auto root = std::filesystem::temp_directory_path() / "rollsim_acceptance_determinism";
  RunOptions opt;
  opt.full_trace = true;
  opt.keep_step_trace = true;
  std::string mismatched;
  int presets = 0;
  for (const auto &name : scenario::PresetNames()) {
    const json doc = scenario::LoadScenarioJson(name);
    std::filesystem::remove_all(root);
    scenario::WriteArtifacts(scenario::RunScenario(doc, opt), root / "a");
    scenario::WriteArtifacts(scenario::RunScenario(doc, opt), root / "b");
    const auto a = ReadDir(root / "a");
    const auto b = ReadDir(root / "b");
    if (a != b || a.count("timeline.jsonl") == 0) mismatched += " " + name;
    ++presets;
  }
  std::filesystem::remove_all(root);
  return {mismatched.empty() && presets > 0,
          std::to_string(presets) + " presets, artifacts byte-identical" +
              (mismatched.empty() ? "" : "; mismatch:" + mismatched)};
}

double PrefillSecondsPerToken(const RunResult &r) {
  double secs = 0.0;
  double tokens = 0.0;
  for (const auto &rec : r.step_trace) {
    if (rec.kind != proxy::StepKind::kPrefill) continue;
    secs += rec.duration;
    tokens += static_cast<double>(rec.tokens);
  }
  return tokens > 0 ? secs / tokens : 0.0;
}

// 3. Hardware affinity direction.
Outcome Affinity() {
  RunOptions opt = Lean();
  opt.keep_step_trace = true;
  const auto prefill = scenario::Sweep(scenario::LoadScenarioJson("fig4_prefill_heavy"),
                                       SweepAxis::kAffinity, {"h800", "h20"}, std::nullopt, 1, opt);
  const auto decode = scenario::Sweep(scenario::LoadScenarioJson("fig4_decode_heavy"),
                                      SweepAxis::kAffinity, {"h800", "h20"}, std::nullopt, 1, opt);
  auto rollout = [](const RunResult &r) { return metrics::RunSummary::From(r.reports).mean_rollout_time; };
  const double p800 = rollout(prefill.points[0].result), p20 = rollout(prefill.points[1].result);
  const double d800 = rollout(decode.points[0].result), d20 = rollout(decode.points[1].result);
  const double ratio =
      PrefillSecondsPerToken(prefill.points[1].result) / PrefillSecondsPerToken(prefill.points[0].result);
  const double want = 989.5 / 148.0;
  const bool ok = p800 < p20 && d20 < d800 && std::abs(ratio / want - 1.0) <= 0.05;
  return {ok, Fmt("prefill-heavy rollout H800 %.2f s vs H20 %.2f s; decode-heavy H800 %.2f s vs H20 %.2f s",
                  p800, p20, d800, d20) +
                  Fmt("; prefill time ratio %.4f vs %.4f", ratio, want)};
}

// 4. Link calibration against the transfer table.
Outcome Calibration() {
  bool ok = true;
  std::string detail;
  for (const auto &[name, rows] : test::TransferTableRows()) {
    const auto fit = workload::CalibrateLink(name, rows);
    const auto [intercept, slope] = test::OlsOracle(rows);
    ok &= std::abs(fit.model.fixed_overhead - intercept) <= 1e-9;
    ok &= std::abs(1.0 / fit.model.eff_bandwidth - slope) <= 1e-9 * slope;
    for (double e : fit.relative_residuals) ok &= std::abs(e) <= 0.15;
    if (name == "TCP") ok &= std::abs(fit.relative_residuals[2]) <= 0.10;
    detail += name + Fmt(" overhead %.3f s, max |residual| %.2f%%; ", fit.model.fixed_overhead,
                  100.0 * fit.max_abs_relative_residual);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

double Spearman(const std::vector<double> &x, const std::vector<double> &y) {
  auto ranks = [](const std::vector<double> &v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size();) {
      size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// 5. Trajectory-level vs batch rollout over sigma.
Outcome SigmaSweep() {
  std::vector<std::string> values;
  for (int s = 1; s <= 10; ++s) values.push_back(std::to_string(s));
  const auto res = scenario::Sweep(scenario::LoadScenarioJson("fig10a_sigma_sweep"), SweepAxis::kSigma,
                                   values, std::nullopt, 1, Lean());
  const auto speedups = res.Speedups();
  std::vector<double> sigma, speedup;
  bool all_above_one = true;
  for (const auto &[v, s] : speedups) {
    sigma.push_back(std::stod(v));
    speedup.push_back(s);
    all_above_one &= s >= 1.0;
  }
  const double rho = Spearman(sigma, speedup);
  const bool ok = speedups.size() == 10 && all_above_one && rho > 0.9 && speedup.back() >= 1.2;
  return {ok, Fmt("speedup %.3fx at sigma=1, %.3fx at sigma=10, Spearman rho %.3f", speedup.front(),
                  speedup.back(), rho)};
}

// Deterministic finish-time fixture for the order-statistic oracle.
double LatencyOf(uint64_t trajectory_id) {
  // Multiples of 1/128 keep every sum exact in binary floating point.
  return 0.5 + static_cast<double>((trajectory_id * 2654435761ULL) % 1000) / 128.0;
}

struct FixtureCase {
  int64_t groups;
  int64_t g;
  double r;
};

bool OrderStatisticFixture(const FixtureCase &c, std::string &why) {
  const int64_t turns = 3;
  const double reset = 1.0, step = 2.0;
  sim::Kernel kernel(9);
  test::FakeLlm llm(kernel, [](const proxy::GenerationRequest &req) { return LatencyOf(req.trajectory_id); });
  test::FakeReward reward(kernel, 0.0);
  rollout::RolloutConfig cfg;
  workload::TaskSpec task;
  task.tag = "fixture";
  task.turns = sim::IntDistribution::Constant(turns);
  task.initial_prompt_tokens = sim::IntDistribution::Constant(64);
  task.prompt_tokens_per_turn = sim::IntDistribution::Constant(8);
  task.response_tokens_per_turn = sim::IntDistribution::Constant(8);
  task.env_reset_dist = sim::LatencyDistribution::Constant(reset);
  task.env_step_dist = sim::LatencyDistribution::Constant(step);
  cfg.tasks = {task};
  cfg.group_size = c.g;
  cfg.redundancy = c.r;
  cfg.keep_trajectories = true;
  rollout::RolloutScheduler sched(kernel, cfg, llm, reward);
  buffer::SampleBuffer buf(kernel, 0, c.g);
  sched.SetCompletionListener([&](const rollout::Trajectory &t) { buf.Put(t); });
  double collected = -1.0;
  buf.GetBatch(c.groups * c.g, [&](std::vector<rollout::Trajectory>) { collected = kernel.Now(); });
  for (int64_t k = 0; k < c.groups; ++k) sched.LaunchGroup(0);
  kernel.RunUntilQuiescent();

  // Oracle: every member's finish time from its latency alone, grouped by
  // the group each trajectory belongs to.
  std::map<uint64_t, std::vector<double>> finish;
  for (const auto &t : sched.archive()) {
    finish[t.group_id].push_back(reset + static_cast<double>(turns) * (LatencyOf(t.trajectory_id) + step));
  }
  double oracle = 0.0;
  for (auto &[gid, times] : finish) {
    std::sort(times.begin(), times.end());
    if (static_cast<int64_t>(times.size()) < c.g) {
      why = "group " + std::to_string(gid) + " has fewer than g members";
      return false;
    }
    oracle = std::max(oracle, times[static_cast<size_t>(c.g - 1)]);
  }
  if (c.groups == 1) {
    // Brute force over the pooled launches: the (G*g)-th smallest.
    std::vector<double> pooled;
    for (const auto &[gid, times] : finish) pooled.insert(pooled.end(), times.begin(), times.end());
    std::sort(pooled.begin(), pooled.end());
    if (pooled[static_cast<size_t>(c.groups * c.g - 1)] != oracle) {
      why = "pooled order statistic disagrees";
      return false;
    }
  }
  if (collected != oracle) {
    why = Fmt("G=%.0f g=%.0f r=%.2f: collected at %.9f", static_cast<double>(c.groups),
              static_cast<double>(c.g), c.r, collected) +
          Fmt(", oracle %.9f", oracle);
    return false;
  }
  return true;
}

// 6. Redundancy dominance.
Outcome Redundancy() {
  sim::RandomStream rng(606, "redundancy");
  const std::vector<std::string> rs = {"1", "1.25", "1.5", "2"};
  int64_t violations = 0;
  double best_speedup = 1.0;
  for (int i = 0; i < 100; ++i) {
    const int64_t groups = rng.UniformInt(1, 3);
    const int64_t g = std::vector<int64_t>{2, 4, 8}[static_cast<size_t>(rng.UniformInt(0, 2))];
    // Enough workers that no request ever shares an engine with another.
    json doc = test::SmallScenario(static_cast<int>(4 * groups * g));
    doc["seed"] = 5000 + i;
    doc["tasks"][0]["turns"] = 3;
    doc["tasks"][0]["env_step"] = {
        {"lognormal_tail",
         {{"median", 1.0 + 3.0 * rng.Uniform()}, {"p99_over_p50", 4.0 + 16.0 * rng.Uniform()}}}};
    doc["rollout"]["groups"] = groups;
    doc["rollout"]["group_size"] = g;
    doc["reward"]["cold_start"] = 0.0;
    const auto res = scenario::Sweep(doc, SweepAxis::kRedundancy, rs, std::nullopt, 1, Lean());
    for (size_t k = 1; k < res.points.size(); ++k) {
      if (res.points[k].result.makespan > res.points[k - 1].result.makespan + 1e-9) ++violations;
    }
    best_speedup = std::max(best_speedup, res.points.front().result.makespan / res.points.back().result.makespan);
  }
  int fixtures_ok = 0;
  std::string why;
  const std::vector<FixtureCase> cases = {{1, 4, 1.0}, {1, 4, 2.0}, {1, 8, 1.5}, {1, 3, 1.25},
                                          {2, 4, 1.5}, {3, 2, 2.0}, {4, 8, 1.25}};
  for (const auto &c : cases) fixtures_ok += OrderStatisticFixture(c, why) ? 1 : 0;
  const bool ok = violations == 0 && fixtures_ok == static_cast<int>(cases.size());
  return {ok, std::to_string(violations) + " makespan increases over 100 scenarios x 4 r (best speedup " +
                  Fmt("%.3fx", best_speedup) + "); " + std::to_string(fixtures_ok) + "/" +
                  std::to_string(cases.size()) + " order-statistic fixtures exact" +
                  (why.empty() ? "" : " (" + why + ")")};
}

double Constant(const json &dist) { return dist.is_number() ? dist.get<double>() : dist.at("constant").get<double>(); }

// 7. Paradigm ordering and the analytic async step.
Outcome Paradigms() {
  const json doc = scenario::LoadScenarioJson("fig8_workflow");
  const auto res = scenario::Sweep(doc, SweepAxis::kParadigm, {"sync", "one_off", "async"},
                                   std::nullopt, 1, Lean());
  const double sync = res.points[0].result.makespan;
  const double one_off = res.points[1].result.makespan;
  const RunResult &async = res.points[2].result;

  // Rollout-limited term: one trajectory alone on its own worker, plus the
  // reward call (a cold start, since the instances idle out between batches).
  const scenario::Scenario s = scenario::Scenario::Parse(doc);
  const json &task = doc["tasks"][0];
  const int64_t turns = task["turns"].get<int64_t>();
  const int64_t initial = task["initial_prompt_tokens"].get<int64_t>();
  const int64_t obs = task["prompt_tokens_per_turn"].get<int64_t>();
  const int64_t resp = task["response_tokens_per_turn"].get<int64_t>();
  const auto hw = s.PoolHardware(s.inference.workers[0].pool);
  double traj = Constant(task["env_reset"]);
  int64_t ctx = initial;
  for (int64_t k = 0; k < turns; ++k) {
    if (k > 0) ctx += resp + obs;
    traj += workload::PrefillTime(ctx, s.model, hw) +
            static_cast<double>(resp) * workload::DecodeStepTime(1, s.model, hw) +
            Constant(task["env_step"]);
  }
  const auto &rw = s.reward.service;
  const double rollout_term =
      traj + rw.rule_based_time + (traj > rw.idle_timeout ? rw.cold_start : 0.0);
  // Train + residual-sync term.
  const int64_t batch = s.groups * s.rollout.group_size;
  const int64_t tokens = batch * (initial + (turns - 1) * obs + turns * resp);
  const std::vector<workload::HardwareProfile> train_pool(
      static_cast<size_t>(s.pool(s.training.pool).devices), s.PoolHardware(s.training.pool));
  const double train = workload::TrainStepTime(tokens, s.model, train_pool);
  const auto steady = metrics::RunSummary::From(async.reports, 2);
  double sync_window = 0.0;
  for (size_t i = 2; i < async.reports.size(); ++i) sync_window += async.reports[i].phases.suspend_window;
  sync_window /= static_cast<double>(async.reports.size() - 2);
  const double predicted = std::max(rollout_term, train + sync_window);
  const double speedup = sync / async.makespan;
  const double err = steady.mean_step_time / predicted - 1.0;
  const bool ok = async.makespan <= one_off && one_off <= sync && speedup >= 1.3 && speedup <= 2.5 &&
                  std::abs(err) <= 0.05;
  return {ok, Fmt("makespan async %.1f s, one_off %.1f s, sync %.1f s (%.3fx); ", async.makespan, one_off,
                  sync, speedup) +
                  Fmt("steady step %.3f s vs analytic max(%.3f, %.3f) (%+.2f%%)", steady.mean_step_time,
                      rollout_term, train + sync_window, 100.0 * err)};
}

// 8. Background weight publication.
Outcome Publication() {
  json on = scenario::LoadScenarioJson("cross_cluster");
  on["training"]["background_publication"] = true;
  json off = on;
  off["training"]["background_publication"] = false;
  const RunResult a = scenario::RunScenario(on, Lean());
  const RunResult b = scenario::RunScenario(off, Lean());
  double worst = 0.0;
  int synced = 0;
  double mean_fraction = 0.0;
  for (const auto *r : {&a, &b}) {
    for (const auto &rep : r->reports) {
      const auto &p = rep.phases;
      if (!p.synced) continue;
      const double f = r == &b ? 0.0 : p.publication_completed_fraction;
      if (r == &b && p.publication_completed_fraction != 0.0) worst = 1.0;
      worst = std::max(worst, std::abs(p.transfer_residual - (1.0 - f) * p.full_transfer));
      worst = std::max(worst, std::abs(p.suspend_window -
                                       (p.drain + p.store_retry + p.transfer_residual + p.broadcast)));
      if (r == &a) {
        ++synced;
        mean_fraction += f;
      }
    }
  }
  mean_fraction /= std::max(synced, 1);
  const double step_on = metrics::RunSummary::From(a.reports).mean_step_time;
  const double step_off = metrics::RunSummary::From(b.reports).mean_step_time;
  const double gain = step_off / step_on;
  const bool ok = synced > 0 && worst <= 1e-9 && gain >= 1.05;
  return {ok, Fmt("identity error %.2e over %.0f syncs (mean completed fraction %.3f); step %.2f s", worst,
                  synced, mean_fraction, step_on) +
                  Fmt(" vs %.2f s without background publication (%.3fx)", step_off, gain)};
}

// 9. Reward offloading.
Outcome RewardOffload() {
  const RunResult dedicated = scenario::RunScenario(scenario::LoadScenarioJson("fig12_reward_dedicated"), Lean());
  const RunResult serverless =
      scenario::RunScenario(scenario::LoadScenarioJson("fig12_reward_serverless"), Lean());
  const double util = dedicated.run_utilization.at("reward");
  const double rd = metrics::RunSummary::From(dedicated.reports).mean_rollout_time;
  const double rs = metrics::RunSummary::From(serverless.reports).mean_rollout_time;
  const double cut = 1.0 - rs / rd;
  return {util < 0.15 && cut >= 0.25,
          Fmt("dedicated reward pool utilization %.1f%%; rollout %.1f s -> %.1f s (-%.1f%%)", 100.0 * util, rd,
              rs, 100.0 * cut)};
}

struct EngineRun {
  std::map<uint64_t, proxy::GenerationResult> results;
  double makespan = 0.0;
  double max_step = 0.0;
};

struct RequestSpec {
  uint64_t id;
  int64_t ctx;
  int64_t target;
  double arrival;
};

EngineRun RunEngine(const std::vector<RequestSpec> &reqs, std::optional<std::pair<uint64_t, double>> abort) {
  sim::Kernel kernel(17);
  const auto driver = kernel.RegisterActor("driver");
  std::vector<proxy::StepTraceRecord> trace;
  EngineRun out;
  proxy::EngineConfig cfg;
  cfg.model = *workload::BuiltinModel("Qwen3-8B");
  cfg.hw = workload::H800();
  cfg.chunk_size = 512;
  proxy::InferenceEngine engine(
      kernel, "w0", cfg,
      [&](const proxy::GenerationRequest &, proxy::GenerationResult r) { out.results[r.request_id] = r; },
      &trace);
  for (const auto &q : reqs) {
    proxy::GenerationRequest r;
    r.request_id = q.id;
    r.context_tokens = q.ctx;
    r.max_new_tokens = q.target;
    kernel.Schedule(q.arrival, driver, "add",
                    [&engine, r]() { engine.Deliver(proxy::Command{proxy::Command::Kind::kAdd, r, 0, {}}); });
  }
  if (abort) {
    const uint64_t id = abort->first;
    kernel.Schedule(abort->second, driver, "abort", [&engine, id]() {
      engine.Deliver(proxy::Command{proxy::Command::Kind::kAbort, {}, id, {}});
    });
  }
  out.makespan = kernel.RunUntilQuiescent();
  for (const auto &t : trace) {
    out.max_step = std::max(out.max_step, t.duration / static_cast<double>(std::max<int64_t>(t.steps, 1)));
  }
  return out;
}

// 10. Engine loop: abort does not stall others; batching beats serial.
Outcome EngineLoop() {
  const auto model = *workload::BuiltinModel("Qwen3-8B");
  const auto hw = workload::H800();
  sim::RandomStream rng(1010, "engine_loop");
  int64_t stalls = 0;
  double worst_delay_steps = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RequestSpec> reqs;
    const int64_t n = rng.UniformInt(2, 8);
    for (int64_t i = 0; i < n; ++i) {
      reqs.push_back({static_cast<uint64_t>(i), rng.UniformInt(1, 4000), rng.UniformInt(1, 400),
                      0.5 * rng.Uniform()});
    }
    const EngineRun base = RunEngine(reqs, std::nullopt);
    const uint64_t victim = static_cast<uint64_t>(rng.UniformInt(0, n - 1));
    const double at = base.results.at(victim).finish_time * rng.Uniform();
    const EngineRun cut = RunEngine(reqs, std::make_pair(victim, at));
    for (const auto &q : reqs) {
      if (q.id == victim) continue;
      const double delay = cut.results.at(q.id).finish_time - base.results.at(q.id).finish_time;
      const double step = std::max(base.max_step, cut.max_step);
      worst_delay_steps = std::max(worst_delay_steps, delay / step);
      if (delay > step + 1e-12) ++stalls;
    }
  }

  int64_t serial_violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RequestSpec> reqs;
    const int64_t n = rng.UniformInt(1, 6);
    for (int64_t i = 0; i < n; ++i) {
      reqs.push_back({static_cast<uint64_t>(i), rng.UniformInt(1, 3000), rng.UniformInt(1, 300),
                      trial % 2 == 0 ? 0.0 : 0.2 * rng.Uniform()});
    }
    const double batched = RunEngine(reqs, std::nullopt).makespan;
    std::vector<size_t> order(reqs.size());
    std::iota(order.begin(), order.end(), 0);
    double serial = std::numeric_limits<double>::infinity();
    do {
      double t = 0.0;
      for (size_t i : order) {
        t = std::max(t, reqs[i].arrival) + workload::PrefillTime(reqs[i].ctx, model, hw) +
            static_cast<double>(reqs[i].target) * workload::DecodeStepTime(1, model, hw);
      }
      serial = std::min(serial, t);
    } while (std::next_permutation(order.begin(), order.end()));
    if (batched > serial + 1e-9) ++serial_violations;
  }
  return {stalls == 0 && serial_violations == 0,
          std::to_string(stalls) + " stalls over 200 abort traces (worst delay " +
              Fmt("%.3f", worst_delay_steps) + " steps); " + std::to_string(serial_violations) +
              " of 200 instances slower than the serial oracle"};
}

// 11. Alpha sweep sanity.
Outcome AlphaSweep() {
  const json doc = scenario::LoadScenarioJson("fig11_alpha_sweep");
  const std::vector<std::string> alphas = {"1", "2", "3", "4", "5", "6"};
  std::vector<double> step(alphas.size(), 0.0);
  bool aborts_monotone = true;
  std::string aborts;
  const std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  for (uint64_t seed : seeds) {
    const auto res = scenario::Sweep(doc, SweepAxis::kAlpha, alphas, seed, 1, Lean());
    int64_t prev = std::numeric_limits<int64_t>::max();
    aborts += (seed == seeds.front() ? "" : " | ");
    for (size_t i = 0; i < res.points.size(); ++i) {
      const auto summary = metrics::RunSummary::From(res.points[i].result.reports);
      aborts_monotone &= summary.stale_aborts <= prev;
      prev = summary.stale_aborts;
      aborts += (i ? "/" : "") + std::to_string(summary.stale_aborts);
      step[i] += summary.mean_step_time / static_cast<double>(seeds.size());
    }
  }
  bool steps_ok = true;
  double best = step[0];
  for (double s : step) {
    steps_ok &= s <= best * 1.02;
    best = std::min(best, s);
  }
  return {aborts_monotone && steps_ok,
          "stale aborts per seed " + aborts + Fmt("; mean step %.2f s at alpha=1, %.2f s at alpha=6", step.front(),
                                                  step.back())};
}

}  // namespace
}  // namespace rollsim::acceptance

int main() {
  using rollsim::acceptance::Outcome;
  const std::vector<std::function<Outcome()>> criteria = {
      rollsim::acceptance::Staleness,   rollsim::acceptance::Determinism,  rollsim::acceptance::Affinity,
      rollsim::acceptance::Calibration, rollsim::acceptance::SigmaSweep,   rollsim::acceptance::Redundancy,
      rollsim::acceptance::Paradigms,   rollsim::acceptance::Publication,  rollsim::acceptance::RewardOffload,
      rollsim::acceptance::EngineLoop,  rollsim::acceptance::AlphaSweep,
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception &e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
