// Copyright 2026 The rollsim Authors.
// SPDX-License-Identifier: Apache-2.0

// rollsim: run scenarios, sweep one parameter, or fit link models.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rollsim/common/error.h"
#include "rollsim/metrics/export.h"
#include "rollsim/scenario/scenario.h"
#include "rollsim/scenario/simulation.h"
#include "rollsim/scenario/sweep.h"
#include "rollsim/workload/link_model.h"

namespace {

using nlohmann::json;
using namespace rollsim;

constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;

std::string DefaultOut(const std::string &out, const std::string &name) {
  return out.empty() ? "out/" + name : out;
}

void PrintPhaseTotals(const scenario::RunResult &r) {
  double total = 0;
  for (const auto &[k, v] : r.phase_totals) total += v;
  std::printf("phase totals over completed trajectories:\n");
  for (const auto &[k, v] : r.phase_totals) {
    std::printf("  %-11s %14.3f s  %5.1f%%\n", k.c_str(), v, total > 0 ? 100.0 * v / total : 0.0);
  }
  std::printf("utilization:");
  for (const auto &[pool, u] : r.run_utilization) std::printf(" %s=%.3f", pool.c_str(), u);
  std::printf("\n");
}

int Run(const std::string &scenario_path, std::optional<uint64_t> seed, const std::string &out,
        bool full_trace) {
  json doc = scenario::LoadScenarioJson(scenario_path);
  if (seed) doc["seed"] = *seed;
  scenario::RunOptions options;
  options.full_trace = full_trace;
  const scenario::RunResult r = scenario::RunScenario(doc, options);
  const std::string dir = DefaultOut(out, r.scenario_name);
  scenario::WriteArtifacts(r, dir);
  std::ostringstream table;
  metrics::WriteSummaryTable(table, r.reports);
  std::printf("scenario %s (hash %s) seed %llu paradigm %s\n", r.scenario_name.c_str(),
              r.scenario_hash.c_str(), static_cast<unsigned long long>(r.seed), r.paradigm.c_str());
  std::fputs(table.str().c_str(), stdout);
  PrintPhaseTotals(r);
  std::printf("artifacts written to %s\n", dir.c_str());
  return 0;
}

int Sweep(const std::string &scenario_path, const std::string &axis_name,
          const std::vector<std::string> &values, std::optional<uint64_t> seed,
          const std::string &out, int jobs) {
  const json doc = scenario::LoadScenarioJson(scenario_path);
  const auto axis = scenario::ParseSweepAxis(axis_name);
  const auto result = scenario::Sweep(doc, axis, values, seed, jobs);
  const std::string name = doc.value("name", std::string("scenario"));
  const std::string dir = DefaultOut(out, name + "_" + axis_name);

  std::ostringstream summary;
  summary << "value,variant,steps,mean_step_time,mean_rollout_time,makespan,stale_aborts,"
             "wasted_tokens\n";
  std::printf("%-12s %-10s %12s %12s %12s %8s\n", axis_name.c_str(), "variant", "step_time",
              "rollout", "makespan", "stale");
  for (const auto &p : result.points) {
    const auto s = metrics::RunSummary::From(p.result.reports);
    summary << p.value << "," << p.variant << "," << s.steps << ","
            << metrics::Fixed9(s.mean_step_time) << "," << metrics::Fixed9(s.mean_rollout_time)
            << "," << metrics::Fixed9(s.makespan) << "," << s.stale_aborts << ","
            << s.wasted_tokens << "\n";
    std::printf("%-12s %-10s %12.3f %12.3f %12.3f %8lld\n", p.value.c_str(), p.variant.c_str(),
                s.mean_step_time, s.mean_rollout_time, s.makespan,
                static_cast<long long>(s.stale_aborts));
  }
  if (axis == scenario::SweepAxis::kSigma) {
    summary << "\nvalue,speedup\n";
    for (const auto &[v, sp] : result.Speedups()) {
      summary << v << "," << metrics::Fixed9(sp) << "\n";
      std::printf("sigma %s: trajectory-mode speedup %.3fx\n", v.c_str(), sp);
    }
  }
  metrics::WriteFile(std::filesystem::path(dir) / "sweep_steps.csv", result.MergedCsv());
  metrics::WriteFile(std::filesystem::path(dir) / "sweep_summary.csv", summary.str());
  std::printf("artifacts written to %s\n", dir.c_str());
  return 0;
}

// Table columns: label,size_gib,<link>,<link>,...
int Calibrate(const std::string &table_path, const std::string &out) {
  std::ifstream in(table_path);
  if (!in) throw Error("cannot open " + table_path);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<workload::TransferSample>> samples;
  std::vector<std::string> labels;
  auto split = [](const std::string &s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      if (header.size() < 3 || header[1] != "size_gib") {
        throw InvalidArgument("calibration table header must be label,size_gib,<link>...");
      }
      samples.resize(header.size() - 2);
      continue;
    }
    if (cells.size() != header.size()) {
      throw InvalidArgument("calibration row '" + line + "' has the wrong number of cells");
    }
    labels.push_back(cells[0]);
    const double bytes = std::stod(cells[1]) * kGiB;
    for (size_t c = 2; c < cells.size(); ++c) samples[c - 2].push_back({bytes, std::stod(cells[c])});
  }
  json links = json::object();
  for (size_t c = 0; c < samples.size(); ++c) {
    const std::string name = header[c + 2];
    const auto fit = workload::CalibrateLink(name, samples[c]);
    json rows = json::array();
    for (size_t i = 0; i < labels.size(); ++i) {
      rows.push_back({{"label", labels[i]},
                      {"observed", samples[c][i].seconds},
                      {"predicted", fit.model.TransferTime(samples[c][i].bytes)},
                      {"relative_residual", fit.relative_residuals[i]}});
    }
    links[name] = {{"fixed_overhead", fit.model.fixed_overhead},
                   {"bandwidth", fit.model.eff_bandwidth},
                   {"max_abs_relative_residual", fit.max_abs_relative_residual},
                   {"rows", rows}};
    std::printf("%-8s overhead %8.3f s  bandwidth %7.3f GiB/s  max |residual| %5.1f%%\n",
                name.c_str(), fit.model.fixed_overhead, fit.model.eff_bandwidth / kGiB,
                100.0 * fit.max_abs_relative_residual);
  }
  const std::string path =
      (std::filesystem::path(out.empty() ? "out" : out) / "links.json").string();
  metrics::WriteFile(path, json{{"links", links}}.dump(2) + "\n");
  std::printf("link models written to %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"rollsim: discrete-event simulator for RL post-training pipelines"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out;
  std::optional<uint64_t> seed;
  bool full_trace = false;
  std::string axis;
  std::vector<std::string> values;
  int jobs = 1;
  std::string table;

  auto *run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  run->add_option("--scenario", scenario_path, "Scenario file or preset name")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Output directory")->envname("ROLLSIM_OUT_DIR");
  run->add_flag("--full-trace", full_trace, "Keep the full event timeline");

  auto *sweep = app.add_subcommand("sweep", "Run one scenario per axis value");
  sweep->add_option("--scenario", scenario_path, "Scenario file or preset name")->required();
  sweep->add_option("--axis", axis, "alpha, sigma, redundancy, paradigm or affinity")->required();
  sweep->add_option("--values", values, "Axis values")->required()->delimiter(',');
  sweep->add_option("--seed", seed, "Seed shared by every run");
  sweep->add_option("--out", out, "Output directory")->envname("ROLLSIM_OUT_DIR");
  sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto *calibrate = app.add_subcommand("calibrate", "Fit link models from a transfer table");
  calibrate->add_option("table", table, "CSV: label,size_gib,<link>...")->required();
  calibrate->add_option("--out", out, "Output directory")->envname("ROLLSIM_OUT_DIR");

  auto *presets = app.add_subcommand("presets", "List bundled scenario presets");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return Run(scenario_path, seed, out, full_trace);
    if (*sweep) return Sweep(scenario_path, axis, values, seed, out, jobs);
    if (*calibrate) return Calibrate(table, out);
    if (*presets) {
      for (const auto &name : scenario::PresetNames()) std::printf("%s\n", name.c_str());
      return 0;
    }
  } catch (const ValidationError &e) {
    std::fprintf(stderr, "invalid scenario:\n");
    for (const auto &d : e.diagnostics()) std::fprintf(stderr, "  %s\n", d.c_str());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
