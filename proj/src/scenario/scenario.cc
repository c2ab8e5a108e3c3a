// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/scenario/scenario.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "rollsim/common/error.h"
#include "rollsim/sim/random.h"

namespace rollsim::scenario {

using nlohmann::json;

namespace {

/// Collects field-level problems instead of stopping at the first one.
class Reader {
 public:
  void Add(const std::string &path, const std::string &msg) { diags_.push_back(path + ": " + msg); }
  const std::vector<std::string> &diags() const { return diags_; }

  const json *Field(const json &obj, const std::string &key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  template <typename T>
  T Get(const json &obj, const std::string &key, const std::string &path, T fallback) {
    const json *f = Field(obj, key);
    if (f == nullptr || f->is_null()) return fallback;
    return Convert<T>(*f, Join(path, key), fallback);
  }

  template <typename T>
  std::optional<T> Require(const json &obj, const std::string &key, const std::string &path) {
    const json *f = Field(obj, key);
    if (f == nullptr || f->is_null()) {
      Add(Join(path, key), "required field is missing");
      return std::nullopt;
    }
    const size_t before = diags_.size();
    T v = Convert<T>(*f, Join(path, key), T{});
    if (diags_.size() != before) return std::nullopt;
    return v;
  }

  static std::string Join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  template <typename T>
  T Convert(const json &v, const std::string &path, T fallback) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) {
        Add(path, "expected a boolean");
        return fallback;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) {
        Add(path, "expected a string");
        return fallback;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        Add(path, "expected an integer");
        return fallback;
      }
      if (std::is_unsigned_v<T> && v.get<int64_t>() < 0) {
        Add(path, "must be non-negative");
        return fallback;
      }
    } else {
      if (!v.is_number()) {
        Add(path, "expected a number");
        return fallback;
      }
    }
    return v.get<T>();
  }

  std::vector<std::string> diags_;
};

workload::HardwareProfile ParseHardware(Reader &r, const std::string &name, const json &j,
                                        const std::string &path) {
  workload::HardwareProfile hw;
  if (auto builtin = workload::BuiltinHardware(name)) hw = *builtin;
  hw.name = name;
  hw.tflops = r.Get<double>(j, "tflops", path, hw.tflops);
  hw.hbm_bytes = r.Get<double>(j, "hbm_bytes", path, hw.hbm_bytes);
  hw.hbm_bw = r.Get<double>(j, "hbm_bw", path, hw.hbm_bw);
  hw.nvlink_bw = r.Get<double>(j, "nvlink_bw", path, hw.nvlink_bw);
  hw.cost_unit = r.Get<double>(j, "cost_unit", path, hw.cost_unit);
  try {
    hw.Validate();
  } catch (const Error &e) {
    r.Add(path, e.what());
  }
  return hw;
}

std::optional<workload::ModelSpec> ParseModel(Reader &r, const json &j, const std::string &path) {
  if (j.is_string()) {
    auto m = workload::BuiltinModel(j.get<std::string>());
    if (!m) r.Add(path, "unknown model '" + j.get<std::string>() + "'");
    return m;
  }
  if (!j.is_object()) {
    r.Add(path, "expected a model name or object");
    return std::nullopt;
  }
  workload::ModelSpec m;
  const std::string base = r.Get<std::string>(j, "base", path, "");
  if (!base.empty()) {
    auto b = workload::BuiltinModel(base);
    if (!b) {
      r.Add(path + ".base", "unknown model '" + base + "'");
    } else {
      m = *b;
    }
  }
  m.name = r.Get<std::string>(j, "name", path, m.name.empty() ? "custom" : m.name);
  m.params = r.Get<double>(j, "params", path, m.params);
  m.bytes_per_param = r.Get<double>(j, "bytes_per_param", path, m.bytes_per_param);
  m.kv_bytes_per_token = r.Get<double>(j, "kv_bytes_per_token", path, m.kv_bytes_per_token);
  try {
    m.Validate();
  } catch (const Error &e) {
    r.Add(path, e.what());
    return std::nullopt;
  }
  return m;
}

template <typename F>
auto Guard(Reader &r, const std::string &path, F &&f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const ValidationError &e) {
    for (const auto &d : e.diagnostics()) r.Add(path, d);
  } catch (const std::exception &e) {
    r.Add(path, e.what());
  }
  return std::nullopt;
}

}  // namespace

sim::LatencyDistribution ParseLatency(const json &j) {
  if (j.is_number()) return sim::LatencyDistribution::Constant(j.get<double>());
  if (!j.is_object()) throw InvalidArgument("expected a number or a distribution object");
  std::optional<sim::LatencyDistribution> d;
  int families = 0;
  if (j.contains("constant")) {
    ++families;
    d = sim::LatencyDistribution::Constant(j.at("constant").get<double>());
  }
  if (j.contains("gaussian")) {
    ++families;
    const auto &g = j.at("gaussian");
    d = sim::LatencyDistribution::Gaussian(g.at("mean").get<double>(), g.at("stddev").get<double>());
  }
  if (j.contains("lognormal")) {
    ++families;
    const auto &g = j.at("lognormal");
    d = sim::LatencyDistribution::LogNormal(g.at("mu").get<double>(), g.at("sigma").get<double>());
  }
  if (j.contains("lognormal_tail")) {
    ++families;
    const auto &g = j.at("lognormal_tail");
    d = sim::LatencyDistribution::LogNormalFromTail(g.at("median").get<double>(),
                                                    g.at("p99_over_p50").get<double>());
  }
  if (j.contains("empirical")) {
    ++families;
    d = sim::LatencyDistribution::Empirical(j.at("empirical").get<std::vector<double>>());
  }
  if (families != 1) {
    throw InvalidArgument(
        "expected exactly one of constant, gaussian, lognormal, lognormal_tail, empirical");
  }
  const double p = j.value("failure_prob", 0.0);
  const double penalty = j.value("failure_penalty", 0.0);
  if (p > 0.0 || penalty > 0.0) d = d->WithFailure(p, penalty);
  return *d;
}

sim::IntDistribution ParseIntDist(const json &j) {
  if (j.is_number_integer()) return sim::IntDistribution::Constant(j.get<int64_t>());
  if (j.is_object() && j.contains("uniform")) {
    const auto v = j.at("uniform").get<std::vector<int64_t>>();
    if (v.size() != 2) throw InvalidArgument("uniform expects [min, max]");
    return sim::IntDistribution::Uniform(v[0], v[1]);
  }
  if (j.is_object() && j.contains("empirical")) {
    return sim::IntDistribution::Empirical(j.at("empirical").get<std::vector<int64_t>>());
  }
  throw InvalidArgument("expected an integer, {\"uniform\": [min, max]} or {\"empirical\": [...]}");
}

const PoolSpec &Scenario::pool(const std::string &label) const {
  for (const auto &p : pools) {
    if (p.label == label) return p;
  }
  throw NotFound("scenario: unknown pool '" + label + "'");
}

workload::HardwareProfile Scenario::PoolHardware(const std::string &label) const {
  const PoolSpec &p = pool(label);
  if (p.hardware.empty()) throw InvalidArgument("scenario: pool '" + label + "' has no GPUs");
  return hardware.at(p.hardware);
}

Scenario Scenario::Parse(const json &doc) {
  Reader r;
  Scenario s;
  s.source = doc;
  if (!doc.is_object()) throw ValidationError({"scenario: expected a JSON object"});

  s.name = r.Get<std::string>(doc, "name", "", "unnamed");
  if (auto seed = r.Require<uint64_t>(doc, "seed", "")) s.seed = *seed;
  s.steps = r.Get<int64_t>(doc, "steps", "", 1);
  if (s.steps < 1) r.Add("steps", "must be >= 1");
  const std::string trace = r.Get<std::string>(doc, "trace", "", "digest");
  if (trace != "digest" && trace != "full") r.Add("trace", "expected \"digest\" or \"full\"");
  s.full_trace = trace == "full";

  // Hardware catalog: built-ins plus overrides or new profiles.
  for (const char *name : {"H800", "H20"}) s.hardware[name] = *workload::BuiltinHardware(name);
  if (const json *hw = r.Field(doc, "hardware")) {
    if (!hw->is_object()) {
      r.Add("hardware", "expected an object of profiles");
    } else {
      for (const auto &[name, spec] : hw->items()) {
        s.hardware[name] = ParseHardware(r, name, spec, "hardware." + name);
      }
    }
  }

  if (const json *m = r.Field(doc, "model")) {
    if (auto model = ParseModel(r, *m, "model")) s.model = *model;
  } else {
    r.Add("model", "required field is missing");
  }

  // Pools.
  std::set<std::string> labels;
  if (const json *pools = r.Field(doc, "pools"); pools != nullptr && pools->is_array()) {
    for (size_t i = 0; i < pools->size(); ++i) {
      const std::string path = "pools[" + std::to_string(i) + "]";
      PoolSpec p;
      if (auto label = r.Require<std::string>((*pools)[i], "label", path)) p.label = *label;
      p.hardware = r.Get<std::string>((*pools)[i], "hardware", path, "");
      p.devices = r.Get<int64_t>((*pools)[i], "devices", path, 0);
      if (p.devices < 0) r.Add(path + ".devices", "must be >= 0");
      if (!p.hardware.empty() && s.hardware.count(p.hardware) == 0) {
        r.Add(path + ".hardware", "unknown hardware profile '" + p.hardware + "'");
      }
      if (!labels.insert(p.label).second) r.Add(path + ".label", "duplicate pool '" + p.label + "'");
      s.pools.push_back(p);
    }
  } else {
    r.Add("pools", "required array is missing");
  }
  auto gpu_pool = [&](const std::string &label, const std::string &path) {
    auto it = std::find_if(s.pools.begin(), s.pools.end(),
                           [&](const PoolSpec &p) { return p.label == label; });
    if (it == s.pools.end()) {
      r.Add(path, "unknown pool '" + label + "'");
      return false;
    }
    if (it->hardware.empty()) {
      r.Add(path, "pool '" + label + "' has no GPU hardware");
      return false;
    }
    return true;
  };

  // Links: explicit models and/or samples to calibrate.
  if (const json *links = r.Field(doc, "links"); links != nullptr && links->is_object()) {
    for (const auto &[name, spec] : links->items()) {
      const std::string path = "links." + name;
      workload::LinkModel lm;
      lm.name = name;
      lm.fixed_overhead = r.Get<double>(spec, "fixed_overhead", path, 0.0);
      lm.eff_bandwidth = r.Get<double>(spec, "bandwidth", path, 0.0);
      Guard(r, path, [&]() {
        lm.Validate();
        return 0;
      });
      s.links[name] = lm;
    }
  }
  if (const json *samples = r.Field(doc, "link_samples");
      samples != nullptr && samples->is_object()) {
    for (const auto &[name, rows] : samples->items()) {
      const std::string path = "link_samples." + name;
      std::vector<workload::TransferSample> pts;
      if (!rows.is_array()) {
        r.Add(path, "expected an array of {gib|bytes, seconds}");
        continue;
      }
      for (const auto &row : rows) {
        workload::TransferSample t;
        t.bytes = row.contains("gib") ? row.value("gib", 0.0) * workload::kGiB
                                      : row.value("bytes", 0.0);
        t.seconds = row.value("seconds", 0.0);
        pts.push_back(t);
      }
      if (auto fit = Guard(r, path, [&]() { return workload::CalibrateLink(name, pts); })) {
        s.links[name] = fit->model;
      }
    }
  }

  // Training.
  if (const json *t = r.Field(doc, "training")) {
    if (auto pool = r.Require<std::string>(*t, "pool", "training")) {
      if (gpu_pool(*pool, "training.pool")) s.training.pool = *pool;
    }
    const std::string paradigm = r.Get<std::string>(*t, "paradigm", "training", "sync");
    const auto alpha = r.Get<uint64_t>(*t, "alpha", "training", 1);
    if (auto p = Guard(r, "training.paradigm", [&]() { return train::ParadigmSpec::Parse(paradigm, alpha); })) {
      s.training.paradigm = *p;
    }
    s.training.checkpoint_interval = r.Get<int64_t>(*t, "checkpoint_interval", "training", 1);
    if (s.training.checkpoint_interval < 1) r.Add("training.checkpoint_interval", "must be >= 1");
    s.training.background_publication =
        r.Get<bool>(*t, "background_publication", "training", true);
    s.training.mfu = r.Get<double>(*t, "mfu", "training", workload::kDefaultMfu);
    if (!(s.training.mfu > 0 && s.training.mfu <= 1)) r.Add("training.mfu", "must be in (0, 1]");
  } else {
    r.Add("training", "required section is missing");
  }

  // Inference.
  std::set<std::string> worker_pools;
  std::vector<std::string> worker_ids;
  if (const json *inf = r.Field(doc, "inference")) {
    InferenceSpec &spec = s.inference;
    spec.chunk_size = r.Get<int64_t>(*inf, "chunk_size", "inference", 512);
    spec.max_running = r.Get<int64_t>(*inf, "max_running", "inference", 256);
    spec.mfu = r.Get<double>(*inf, "mfu", "inference", workload::kDefaultMfu);
    spec.mbu = r.Get<double>(*inf, "mbu", "inference", workload::kDefaultMbu);
    spec.prefix_discount = r.Get<double>(*inf, "prefix_discount", "inference", 1.0);
    if (spec.chunk_size < 1) r.Add("inference.chunk_size", "must be >= 1");
    if (spec.max_running < 1) r.Add("inference.max_running", "must be >= 1");
    if (!(spec.mfu > 0 && spec.mfu <= 1)) r.Add("inference.mfu", "must be in (0, 1]");
    if (!(spec.mbu > 0 && spec.mbu <= 1)) r.Add("inference.mbu", "must be in (0, 1]");
    if (!(spec.prefix_discount > 0 && spec.prefix_discount <= 1)) {
      r.Add("inference.prefix_discount", "must be in (0, 1]");
    }
    std::map<std::string, std::string> pool_link;
    std::map<std::string, int64_t> next_index;
    if (const json *ws = r.Field(*inf, "workers"); ws != nullptr && ws->is_array() && !ws->empty()) {
      for (size_t i = 0; i < ws->size(); ++i) {
        const std::string path = "inference.workers[" + std::to_string(i) + "]";
        WorkerGroupSpec w;
        if (auto pool = r.Require<std::string>((*ws)[i], "pool", path)) w.pool = *pool;
        w.count = r.Get<int64_t>((*ws)[i], "count", path, 1);
        w.devices_per_worker = r.Get<int64_t>((*ws)[i], "devices_per_worker", path, 1);
        w.link = r.Get<std::string>((*ws)[i], "link", path, "");
        if (w.count < 1) r.Add(path + ".count", "must be >= 1");
        if (w.devices_per_worker < 1) r.Add(path + ".devices_per_worker", "must be >= 1");
        if (!gpu_pool(w.pool, path + ".pool")) continue;
        if (w.link.empty()) {
          r.Add(path + ".link", "required field is missing");
        } else if (s.links.count(w.link) == 0) {
          r.Add(path + ".link", "unknown link '" + w.link + "'");
        }
        auto [it, inserted] = pool_link.emplace(w.pool, w.link);
        if (!inserted && it->second != w.link) {
          r.Add(path + ".link", "pool '" + w.pool + "' already fetches over link '" + it->second + "'");
        }
        worker_pools.insert(w.pool);
        for (int64_t k = 0; k < w.count; ++k) {
          worker_ids.push_back(w.pool + "-" + std::to_string(next_index[w.pool]++));
        }
        spec.workers.push_back(w);
      }
    } else {
      r.Add("inference.workers", "required non-empty array is missing");
    }
    if (const json *aff = r.Field(*inf, "affinity")) {
      if (!aff->is_object()) {
        r.Add("inference.affinity", "expected an object of tag -> pool");
      } else {
        for (const auto &[tag, pool] : aff->items()) {
          if (!pool.is_string()) {
            r.Add("inference.affinity." + tag, "expected a pool label");
            continue;
          }
          if (worker_pools.count(pool.get<std::string>()) == 0) {
            r.Add("inference.affinity." + tag,
                  "pool '" + pool.get<std::string>() + "' has no inference workers");
          }
          spec.affinity[tag] = pool.get<std::string>();
        }
      }
    }
    if (spec.affinity.count("default") == 0 && !spec.workers.empty()) {
      spec.affinity["default"] = spec.workers.front().pool;
    }
  } else {
    r.Add("inference", "required section is missing");
  }

  // Device budget per pool.
  {
    std::map<std::string, int64_t> used;
    for (const auto &w : s.inference.workers) used[w.pool] += w.count * w.devices_per_worker;
    for (const auto &p : s.pools) {
      if (p.label == s.training.pool) used[p.label] += p.devices;
    }
    for (const auto &[label, n] : used) {
      auto it = std::find_if(s.pools.begin(), s.pools.end(),
                             [&](const PoolSpec &p) { return p.label == label; });
      if (it != s.pools.end() && n > it->devices) {
        r.Add("pools." + label, "needs " + std::to_string(n) + " devices but has " +
                                    std::to_string(it->devices));
      }
    }
  }

  // Tasks.
  if (const json *tasks = r.Field(doc, "tasks"); tasks != nullptr && tasks->is_array() && !tasks->empty()) {
    for (size_t i = 0; i < tasks->size(); ++i) {
      const std::string path = "tasks[" + std::to_string(i) + "]";
      const json &tj = (*tasks)[i];
      workload::TaskSpec t;
      if (auto tag = r.Require<std::string>(tj, "tag", path)) t.tag = *tag;
      t.weight = r.Get<double>(tj, "weight", path, 1.0);
      t.affinity_tag = r.Get<std::string>(tj, "affinity_tag", path, "");
      const std::string rc = r.Get<std::string>(tj, "reward_class", path, "rule_based");
      if (auto c = Guard(r, path + ".reward_class", [&]() { return workload::ParseRewardClass(rc); })) {
        t.reward_class = *c;
      }
      auto ints = [&](const char *key, sim::IntDistribution &dst) {
        if (const json *f = r.Field(tj, key)) {
          if (auto d = Guard(r, path + "." + key, [&]() { return ParseIntDist(*f); })) dst = *d;
        }
      };
      ints("turns", t.turns);
      ints("initial_prompt_tokens", t.initial_prompt_tokens);
      ints("prompt_tokens_per_turn", t.prompt_tokens_per_turn);
      ints("response_tokens_per_turn", t.response_tokens_per_turn);
      auto lat = [&](const char *key, sim::LatencyDistribution &dst) {
        if (const json *f = r.Field(tj, key)) {
          if (auto d = Guard(r, path + "." + key, [&]() { return ParseLatency(*f); })) dst = *d;
        }
      };
      lat("env_reset", t.env_reset_dist);
      lat("env_step", t.env_step_dist);
      Guard(r, path, [&]() {
        t.Validate();
        return 0;
      });
      s.rollout.tasks.push_back(t);
    }
  } else {
    r.Add("tasks", "required non-empty array is missing");
  }

  // Rollout.
  if (const json *ro = r.Field(doc, "rollout")) {
    const std::string path = "rollout";
    s.groups = r.Get<int64_t>(*ro, "groups", path, 1);
    s.rollout.group_size = r.Get<int64_t>(*ro, "group_size", path, 8);
    s.rollout.redundancy = r.Get<double>(*ro, "redundancy", path, 1.0);
    const std::string mode = r.Get<std::string>(*ro, "mode", path, "trajectory");
    if (auto m = Guard(r, path + ".mode", [&]() { return rollout::ParseRolloutMode(mode); })) {
      s.rollout.mode = *m;
    }
    s.rollout.env.max_new_tokens = r.Get<int64_t>(*ro, "max_new_tokens", path, 1 << 20);
    s.rollout.env.retry_budget = r.Get<int64_t>(*ro, "retry_budget", path, 3);
    s.rollout.env.reward_retry_backoff = r.Get<double>(*ro, "reward_retry_backoff", path, 1.0);
    s.rollout.replacement_cap_factor = r.Get<double>(*ro, "replacement_cap", path, 2.0);
    s.finish_then_reject = r.Get<bool>(*ro, "finish_then_reject", path, false);
    s.max_inflight_groups = r.Get<int64_t>(*ro, "max_inflight_groups", path, 0);
    s.cpu_pool = r.Get<std::string>(*ro, "cpu_pool", path, "");
    if (s.groups < 1) r.Add("rollout.groups", "must be >= 1");
    if (s.max_inflight_groups != 0 && s.max_inflight_groups < s.groups) {
      r.Add("rollout.max_inflight_groups", "must be 0 or >= groups (" + std::to_string(s.groups) + ")");
    }
    if (!s.cpu_pool.empty()) {
      auto it = std::find_if(s.pools.begin(), s.pools.end(),
                             [&](const PoolSpec &p) { return p.label == s.cpu_pool; });
      if (it == s.pools.end()) {
        r.Add("rollout.cpu_pool", "unknown pool '" + s.cpu_pool + "'");
      } else {
        s.rollout.max_live_envs = it->devices;
      }
    }
    if (!s.rollout.tasks.empty()) {
      Guard(r, path, [&]() {
        s.rollout.Validate();
        return 0;
      });
    }
  } else {
    r.Add("rollout", "required section is missing");
  }

  // Reward.
  {
    const json empty = json::object();
    const json *rw = r.Field(doc, "reward");
    const json &rj = rw != nullptr ? *rw : empty;
    const std::string path = "reward";
    reward::RewardServiceConfig &c = s.reward.service;
    const std::string mode = r.Get<std::string>(rj, "mode", path, "serverless");
    if (auto m = Guard(r, path + ".mode", [&]() { return reward::ParseRewardMode(mode); })) c.mode = *m;
    s.reward.endpoint = r.Get<std::string>(rj, "endpoint", path, s.reward.endpoint);
    if (!cluster::IsValidEndpoint(s.reward.endpoint)) {
      r.Add(path + ".endpoint", "malformed endpoint '" + s.reward.endpoint + "'");
    }
    c.max_instances = r.Get<int64_t>(rj, "max_instances", path, c.max_instances);
    c.cold_start = r.Get<double>(rj, "cold_start", path, c.cold_start);
    c.idle_timeout = r.Get<double>(rj, "idle_timeout", path, c.idle_timeout);
    c.queue_cap = r.Get<int64_t>(rj, "queue_cap", path, c.queue_cap);
    c.rule_based_time = r.Get<double>(rj, "rule_based_time", path, c.rule_based_time);
    if (const json *sb = r.Field(rj, "sandbox")) {
      if (auto d = Guard(r, path + ".sandbox", [&]() { return ParseLatency(*sb); })) c.sandbox_time = *d;
    }
    if (const json *m = r.Field(rj, "model")) {
      if (auto model = ParseModel(r, *m, path + ".model")) c.judge_model = *model;
    } else {
      c.judge_model = *workload::BuiltinModel("Qwen2.5-7B");
    }
    s.reward.hardware = r.Get<std::string>(rj, "hardware", path, s.reward.hardware);
    if (c.mode == reward::RewardMode::kDedicated) {
      if (auto pool = r.Require<std::string>(rj, "pool", path)) {
        if (gpu_pool(*pool, path + ".pool")) {
          s.reward.pool = *pool;
          const PoolSpec &p = s.pool(*pool);
          c.max_instances = p.devices;
          c.judge_hw = s.hardware.at(p.hardware);
          if (p.label == s.training.pool || worker_pools.count(p.label) > 0) {
            r.Add(path + ".pool", "pool '" + p.label + "' is already used by another role");
          }
          if (p.devices < 1) r.Add(path + ".pool", "pool '" + p.label + "' has no devices");
        }
      }
    } else if (s.hardware.count(s.reward.hardware) == 0) {
      r.Add(path + ".hardware", "unknown hardware profile '" + s.reward.hardware + "'");
    } else {
      c.judge_hw = s.hardware.at(s.reward.hardware);
    }
    if (c.max_instances >= 1 && c.judge_hw.tflops > 0 && c.judge_model.params > 0) {
      Guard(r, path, [&]() {
        c.Validate();
        return 0;
      });
    }
  }

  // Faults.
  if (const json *f = r.Field(doc, "faults")) {
    const std::set<std::string> ids(worker_ids.begin(), worker_ids.end());
    if (const json *inf = r.Field(*f, "inference_failures"); inf != nullptr && inf->is_array()) {
      for (size_t i = 0; i < inf->size(); ++i) {
        const std::string path = "faults.inference_failures[" + std::to_string(i) + "]";
        InferenceFailure x;
        if (auto w = r.Require<std::string>((*inf)[i], "worker", path)) {
          x.worker = *w;
          if (ids.count(x.worker) == 0) r.Add(path + ".worker", "unknown worker '" + x.worker + "'");
        }
        x.time = r.Get<double>((*inf)[i], "time", path, 0.0);
        x.restart_delay = r.Get<double>((*inf)[i], "restart_delay", path, 30.0);
        if (!sim::IsValidDuration(x.time)) r.Add(path + ".time", "must be >= 0");
        if (!sim::IsValidDuration(x.restart_delay)) r.Add(path + ".restart_delay", "must be >= 0");
        s.inference_failures.push_back(x);
      }
    }
    if (const json *tf = r.Field(*f, "trainer_failures"); tf != nullptr && tf->is_array()) {
      for (size_t i = 0; i < tf->size(); ++i) {
        const std::string path = "faults.trainer_failures[" + std::to_string(i) + "]";
        train::TrainerFailure x;
        x.step = r.Get<int64_t>((*tf)[i], "step", path, 0);
        x.restart_delay = r.Get<double>((*tf)[i], "restart_delay", path, 30.0);
        if (x.step < 0 || x.step >= s.steps) r.Add(path + ".step", "outside the run");
        s.trainer_failures.push_back(x);
      }
    }
    if (const json *so = r.Field(*f, "store_outages"); so != nullptr && so->is_array()) {
      for (size_t i = 0; i < so->size(); ++i) {
        const std::string path = "faults.store_outages[" + std::to_string(i) + "]";
        train::StoreOutage o;
        o.start = r.Get<double>((*so)[i], "start", path, 0.0);
        o.end = r.Get<double>((*so)[i], "end", path, 0.0);
        if (!(o.start >= 0 && o.end > o.start)) r.Add(path, "must satisfy 0 <= start < end");
        s.store_outages.push_back(o);
      }
    }
    s.store_backoff = r.Get<double>(*f, "store_backoff", "faults", 1.0);
    if (!(s.store_backoff > 0)) r.Add("faults.store_backoff", "must be > 0");
  }

  if (!r.diags().empty()) throw ValidationError(r.diags());
  return s;
}

std::filesystem::path PresetDirectory() {
  if (const char *dir = std::getenv("ROLLSIM_PRESET_DIR")) return dir;
#ifdef ROLLSIM_PRESET_DIR
  return ROLLSIM_PRESET_DIR;
#else
  return "scenarios";
#endif
}

std::vector<std::string> PresetNames() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto &e : std::filesystem::directory_iterator(PresetDirectory(), ec)) {
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

json LoadScenarioJson(const std::string &path_or_preset) {
  std::filesystem::path path(path_or_preset);
  if (!std::filesystem::exists(path)) {
    const auto preset = PresetDirectory() / (path_or_preset + ".json");
    if (!std::filesystem::exists(preset)) {
      throw NotFound("scenario '" + path_or_preset + "' is neither a file nor a preset in " +
                     PresetDirectory().string());
    }
    path = preset;
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
}

std::string ScenarioHash(const json &doc) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(sim::Fnv1a64(doc.dump())));
  return buf;
}

}  // namespace rollsim::scenario
