// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rollsim/proxy/llm_proxy.h"

#include <algorithm>

#include "rollsim/common/error.h"

namespace rollsim::proxy {

LlmProxy::LlmProxy(sim::Kernel &kernel, resource::ResourceManager &rm,
                   const std::vector<InferenceWorkerSpec> &workers,
                   cluster::AffinityTable affinity)
    : kernel_(kernel), rm_(rm) {
  actor_ = kernel_.RegisterActor("llm_proxy");
  std::vector<cluster::WorkerSpec> specs;
  std::map<std::string, EngineConfig> configs;
  for (const auto &w : workers) {
    specs.push_back(cluster::WorkerSpec{w.id, w.pool, w.devices});
    EngineConfig cfg = w.engine;
    cfg.hw = cfg.hw.Scaled(static_cast<int>(std::max<int64_t>(1, w.devices)));
    configs[w.id] = std::move(cfg);
  }
  cluster_ = std::make_unique<cluster::Cluster>(
      kernel_, rm_, "inference", resource::WorkerRole::kInference, specs,
      [this, &configs](const cluster::WorkerSpec &spec) {
        auto engine = std::make_unique<InferenceEngine>(
            kernel_, spec.id, configs.at(spec.id),
            [this](const GenerationRequest &req, GenerationResult res) {
              OnTerminal(req, std::move(res));
            },
            &step_trace_);
        engines_.push_back(engine.get());
        return engine;
      });
  cluster_->RegisterHwMapping(kGenerateMethod, std::move(affinity));
}

InferenceEngine *LlmProxy::engine(const std::string &id) const {
  for (auto *e : engines_) {
    if (e->id() == id) return e;
  }
  return nullptr;
}

void LlmProxy::Submit(GenerationRequest request) {
  if (request.context_tokens < 1 || request.max_new_tokens < 1) {
    throw InvalidArgument("submit: context_tokens and max_new_tokens must be >= 1");
  }
  if (!seen_.insert(request.request_id).second) {
    throw InvalidArgument("submit: duplicate request id " + std::to_string(request.request_id));
  }
  if (suspended_) {
    held_.push_back(std::move(request));
    return;
  }
  Route(std::move(request));
}

void LlmProxy::Route(GenerationRequest request) {
  cluster::Worker *target = nullptr;
  cluster::RouteDecision decision;
  try {
    auto [w, d] = cluster_->SelectWorker(kGenerateMethod, request.tag);
    target = w;
    decision = std::move(d);
  } catch (const RoutingError &e) {
    GenerationResult r;
    r.request_id = request.request_id;
    r.trajectory_id = request.trajectory_id;
    r.status = GenerationStatus::kFailed;
    r.error = e.what();
    r.submit_time = kernel_.Now();
    r.finish_time = kernel_.Now();
    Reply(request, r);
    return;
  }
  ++routed_;
  if (decision.fallback) ++fallbacks_;
  ++routes_[{request.tag, decision.pool}];
  in_flight_[request.request_id] = InFlight{target->id(), decision.fallback};
  auto *engine = static_cast<InferenceEngine *>(target);
  kernel_.Schedule(0.0, actor_, decision.fallback ? "route_affinity_fallback" : "route",
                   [] {},
                   "req=" + std::to_string(request.request_id) + " tag=" + request.tag +
                       " pool=" + decision.pool + " worker=" + target->id());
  Command cmd{Command::Kind::kAdd, std::move(request), 0, {}};
  engine->Deliver(std::move(cmd));
}

void LlmProxy::Abort(uint64_t request_id) {
  auto held = std::find_if(held_.begin(), held_.end(), [request_id](const GenerationRequest &r) {
    return r.request_id == request_id;
  });
  if (held != held_.end()) {
    GenerationRequest req = std::move(*held);
    held_.erase(held);
    GenerationResult r;
    r.request_id = req.request_id;
    r.trajectory_id = req.trajectory_id;
    r.status = GenerationStatus::kAborted;
    r.submit_time = kernel_.Now();
    r.finish_time = kernel_.Now();
    Reply(req, r);
    return;
  }
  auto it = in_flight_.find(request_id);
  if (it == in_flight_.end()) return;
  InferenceEngine *e = engine(it->second.worker);
  e->Deliver(Command{Command::Kind::kAbort, {}, request_id, {}});
}

void LlmProxy::OnTerminal(const GenerationRequest &request, GenerationResult result) {
  auto it = in_flight_.find(request.request_id);
  const bool fallback = it != in_flight_.end() && it->second.fallback;
  if (result.status == GenerationStatus::kFailed && result.error == "worker down") {
    ++rerouted_;
    in_flight_.erase(request.request_id);
    if (suspended_) {
      held_.push_back(request);
    } else {
      Route(request);
    }
    return;
  }
  if (it != in_flight_.end()) in_flight_.erase(it);
  result.affinity_fallback = fallback;
  Reply(request, std::move(result));
}

void LlmProxy::Reply(const GenerationRequest &request, GenerationResult result) {
  if (!request.callback) return;
  auto cb = request.callback;
  kernel_.Schedule(0.0, request.reply_to, "generation_done",
                   [cb, result = std::move(result)]() { cb(result); },
                   std::string(GenerationStatusName(result.status)) +
                       " req=" + std::to_string(request.request_id));
}

void LlmProxy::SuspendAll(std::function<void()> on_halted) {
  suspended_ = true;
  std::vector<InferenceEngine *> targets;
  for (auto *e : engines_) {
    if (e->alive()) targets.push_back(e);
  }
  if (targets.empty()) {
    kernel_.Schedule(0.0, actor_, "suspend_done", std::move(on_halted), "workers=0");
    return;
  }
  auto remaining = std::make_shared<size_t>(targets.size());
  auto done = std::make_shared<std::function<void()>>(std::move(on_halted));
  for (auto *e : targets) {
    e->Deliver(Command{Command::Kind::kSuspend, {}, 0, [remaining, done]() {
                         if (--*remaining == 0) (*done)();
                       }});
  }
}

void LlmProxy::ResumeAll() {
  suspended_ = false;
  for (auto *e : engines_) {
    if (e->alive()) e->Deliver(Command{Command::Kind::kResume, {}, 0, {}});
  }
  std::deque<GenerationRequest> held = std::move(held_);
  held_.clear();
  for (auto &r : held) Route(std::move(r));
}

void LlmProxy::SetVersion(uint64_t version) {
  for (auto *e : engines_) e->SetVersion(version);
}

std::optional<sim::SimTime> LlmProxy::FirstDecodeAfterResume() const {
  std::optional<sim::SimTime> earliest;
  for (auto *e : engines_) {
    auto t = e->first_decode_after_resume();
    if (t && (!earliest || *t < *earliest)) earliest = t;
  }
  return earliest;
}

void LlmProxy::FailWorker(const std::string &worker_id, sim::SimTime restart_delay) {
  InferenceEngine *e = engine(worker_id);
  if (e == nullptr) throw NotFound("fail: unknown inference worker '" + worker_id + "'");
  if (!rm_.IsAlive(worker_id)) return;
  rm_.SetClock(kernel_.Now());
  std::vector<GenerationRequest> lost = e->Fail();
  const auto status = rm_.MarkFailed(worker_id);
  if (status == resource::WorkerStatus::kRestarting) {
    kernel_.Schedule(restart_delay, e->actor(), "restart",
                     [this, e, worker_id]() {
                       rm_.SetClock(kernel_.Now());
                       if (rm_.Restart(worker_id) != resource::WorkerStatus::kAlive) return;
                       e->Revive();
                       if (suspended_) e->Deliver(Command{Command::Kind::kSuspend, {}, 0, {}});
                     },
                     "worker=" + worker_id);
  }
  for (auto &req : lost) {
    ++rerouted_;
    in_flight_.erase(req.request_id);
    if (suspended_) {
      held_.push_back(std::move(req));
    } else {
      Route(std::move(req));
    }
  }
}

}  // namespace rollsim::proxy
