// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/scenario/sweep.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rollsim/common/error.h"
#include "rollsim/metrics/export.h"

namespace rollsim::scenario {

using nlohmann::json;

SweepAxis ParseSweepAxis(const std::string &name) {
  if (name == "alpha") return SweepAxis::kAlpha;
  if (name == "sigma") return SweepAxis::kSigma;
  if (name == "redundancy") return SweepAxis::kRedundancy;
  if (name == "paradigm") return SweepAxis::kParadigm;
  if (name == "affinity") return SweepAxis::kAffinity;
  throw InvalidArgument("unknown sweep axis '" + name +
                        "' (expected alpha, sigma, redundancy, paradigm or affinity)");
}

const char *SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kAlpha: return "alpha";
    case SweepAxis::kSigma: return "sigma";
    case SweepAxis::kRedundancy: return "redundancy";
    case SweepAxis::kParadigm: return "paradigm";
    case SweepAxis::kAffinity: return "affinity";
  }
  return "?";
}

namespace {

double ParseNumber(const std::string &axis, const std::string &value) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw InvalidArgument(axis + ": '" + value + "' is not a number");
  }
  return v;
}

}  // namespace

json ApplyAxis(const json &doc, SweepAxis axis, const std::string &value) {
  // Validate the base first so axis errors refer to a well-formed scenario.
  const Scenario base = Scenario::Parse(doc);
  json out = doc;
  switch (axis) {
    case SweepAxis::kAlpha: {
      if (base.training.paradigm.kind != train::Paradigm::kAsync) {
        throw InvalidArgument("alpha axis needs an async paradigm, scenario uses " +
                              base.training.paradigm.ToString());
      }
      const double a = ParseNumber("alpha", value);
      if (a < 1 || a != static_cast<double>(static_cast<int64_t>(a))) {
        throw InvalidArgument("alpha: '" + value + "' must be an integer >= 1");
      }
      out["training"]["paradigm"] = "async";
      out["training"]["alpha"] = static_cast<int64_t>(a);
      break;
    }
    case SweepAxis::kSigma: {
      if (base.rollout.redundancy != 1.0) {
        throw InvalidArgument("sigma axis compares rollout modes and needs redundancy 1");
      }
      const double sigma = ParseNumber("sigma", value);
      if (sigma < 0) throw InvalidArgument("sigma: must be >= 0");
      for (auto &t : out["tasks"]) {
        if (!t.contains("env_step") || !t["env_step"].is_object() ||
            !t["env_step"].contains("gaussian")) {
          throw InvalidArgument("sigma axis needs a gaussian env_step on every task");
        }
        t["env_step"]["gaussian"]["stddev"] = sigma;
      }
      break;
    }
    case SweepAxis::kRedundancy: {
      if (base.rollout.mode != rollout::RolloutMode::kTrajectory) {
        throw InvalidArgument("redundancy axis needs trajectory rollout mode");
      }
      const double r = ParseNumber("redundancy", value);
      if (r < 1.0) throw InvalidArgument("redundancy: must be >= 1");
      out["rollout"]["redundancy"] = r;
      break;
    }
    case SweepAxis::kParadigm: {
      const auto p = train::ParadigmSpec::Parse(value, base.training.paradigm.alpha);
      out["training"]["paradigm"] = p.kind == train::Paradigm::kAsync ? "async" : p.ToString();
      if (p.kind == train::Paradigm::kAsync) out["training"]["alpha"] = p.alpha;
      break;
    }
    case SweepAxis::kAffinity: {
      std::set<std::string> pools;
      for (const auto &w : base.inference.workers) pools.insert(w.pool);
      if (pools.size() < 2) throw InvalidArgument("affinity axis needs at least two inference pools");
      if (pools.count(value) == 0) {
        throw InvalidArgument("affinity: '" + value + "' is not an inference pool");
      }
      out["inference"]["affinity"] = json{{"default", value}};
      break;
    }
  }
  return out;
}

SweepResult Sweep(const json &doc, SweepAxis axis, const std::vector<std::string> &values,
                  std::optional<uint64_t> seed, int jobs, RunOptions options) {
  if (values.empty()) throw InvalidArgument("sweep: no values given");
  struct Job {
    std::string value;
    std::string variant;
    json doc;
  };
  std::vector<Job> work;
  for (const auto &v : values) {
    json d = ApplyAxis(doc, axis, v);
    if (seed) d["seed"] = *seed;
    if (axis == SweepAxis::kSigma) {
      for (const char *mode : {"trajectory", "batch"}) {
        json m = d;
        m["rollout"]["mode"] = mode;
        work.push_back({v, mode, m});
      }
    } else {
      work.push_back({v, "", d});
    }
  }
  // Parse everything up front so a bad value fails before any run starts.
  for (const auto &w : work) Scenario::Parse(w.doc);

  SweepResult out;
  out.axis = axis;
  out.points.resize(work.size());
  std::atomic<size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (size_t i = next++; i < work.size(); i = next++) {
      try {
        RunResult r = RunScenario(work[i].doc, options);
        out.points[i] = SweepPoint{work[i].value, work[i].variant, std::move(r)};
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(jobs, 1, static_cast<int>(work.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string SweepResult::MergedCsv() const {
  std::ostringstream os;
  if (points.empty()) return "";
  const std::vector<std::string> &pools = points.front().result.util_pools;
  metrics::KeyColumns keys = {{"axis", SweepAxisName(axis)}, {"value", ""}, {"variant", ""}};
  os << metrics::StepCsvHeader(pools, keys) << "\n";
  for (const auto &p : points) {
    keys[1].second = p.value;
    keys[2].second = p.variant;
    for (const auto &r : p.result.reports) os << metrics::StepCsvRow(r, pools, keys) << "\n";
  }
  return os.str();
}

std::vector<std::pair<std::string, double>> SweepResult::Speedups() const {
  if (axis != SweepAxis::kSigma) throw StateError("speedups exist only for the sigma axis");
  std::vector<std::pair<std::string, double>> out;
  for (size_t i = 0; i + 1 < points.size(); i += 2) {
    const auto traj = metrics::RunSummary::From(points[i].result.reports);
    const auto batch = metrics::RunSummary::From(points[i + 1].result.reports);
    out.emplace_back(points[i].value, batch.mean_rollout_time / traj.mean_rollout_time);
  }
  return out;
}

}  // namespace rollsim::scenario
