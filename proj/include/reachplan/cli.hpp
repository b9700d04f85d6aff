#pragma once

// Command implementations behind the CLI front end. Kept separate from the
// argument parser so tests can drive them directly.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reachplan/export.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/scenario_io.hpp"
#include "reachplan/simulator.hpp"
#include "reachplan/svg.hpp"

namespace reachplan {
namespace cli {

struct ConfigOverrides {
  std::optional<double> dt;
  std::optional<double> d_min;
  std::optional<double> a_des;
  std::optional<double> w_change;
  std::optional<double> w_profile;
  std::optional<double> timeout;

  void apply(Scenario& sc) const {
    if (dt) sc.config.dt = *dt;
    if (d_min) sc.config.d_min = *d_min;
    if (a_des) sc.config.a_des = *a_des;
    if (w_change) sc.config.w_change = *w_change;
    if (w_profile) sc.config.w_profile = *w_profile;
    if (timeout) sc.config.time_budget = *timeout;
  }
};

struct PlanOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  ConfigOverrides overrides;
  bool svg = false;
  std::vector<double> times;  // snapshot times for the SVG
  double scale = 10.0;
};

inline std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline int cmd_plan(const PlanOptions& opt, std::ostream& err = std::cerr) {
  Scenario sc;
  try {
    sc = io::load_scenario_file(opt.scenario_path);
    opt.overrides.apply(sc);
    sc.validate();
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  PlanResult plan;
  try {
    plan = plan_scenario(sc);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::string base =
      (std::filesystem::path(opt.out_dir) / stem_of(opt.scenario_path))
          .string();
  io::write_file(base + "_corridor.json", io::corridor_json(plan).dump(2) + "\n");

  if (!plan.ok()) {
    err << (plan.status == PlanStatus::kTimeout ? "timeout: " : "no corridor: ")
        << opt.scenario_path << "\n";
    return plan.status == PlanStatus::kTimeout ? 3 : 2;
  }

  io::write_file(base + "_reference.csv", io::reference_csv(plan.reference));
  io::write_file(base + "_reference.json",
                 io::reference_json(plan.reference).dump(2) + "\n");
  if (opt.svg) {
    std::vector<double> times = opt.times;
    if (times.empty()) times = {0.0};
    io::write_file(base + ".svg", svg::render(sc, &plan, times, opt.scale));
  }
  return 0;
}

struct BatchOptions {
  std::string directory;
  std::string out_csv;  // defaults to <dir>/batch_metrics.csv
  ConfigOverrides overrides;
  bool closed_loop = false;
  double horizon = 3.0;
  double replan = 0.3;
  int jobs = 1;
  unsigned seed = 0;
};

struct BatchRow {
  std::string name;
  bool loaded = false;
  bool solved = false;
  bool timed_out = false;
  double ms_per_planned_s = 0.0;
  std::size_t corridors = 0;
  int n_change = 0;
  double J = 0.0;
  int collided = -1;  // -1 when no closed-loop run
};

inline BatchRow run_batch_scenario(const std::string& path,
                                   const BatchOptions& opt) {
  BatchRow row;
  row.name = stem_of(path);
  Scenario sc;
  try {
    sc = io::load_scenario_file(path);
    opt.overrides.apply(sc);
    sc.validate();
  } catch (const ScenarioError&) {
    return row;
  }
  row.loaded = true;
  try {
    const PlanResult plan = plan_scenario(sc);
    row.timed_out = plan.search.timed_out;
    row.corridors = plan.search.corridors.size();
    if (plan.ok()) {
      row.solved = true;
      row.ms_per_planned_s = plan.wall_ms / std::max(1e-9, sc.problem.goal_time.hi);
      row.n_change = plan.best_corridor().n_change;
      row.J = plan.costs[plan.best].J;
    }
  } catch (const std::exception&) {
    row.solved = false;
  }
  if (opt.closed_loop && row.solved) {
    const SimLog log = run_closed_loop(sc, opt.horizon, opt.replan, 0.01,
                                       opt.seed);
    row.collided = log.summary.collided ? 1 : 0;
  }
  return row;
}

inline int cmd_batch(const BatchOptions& opt, std::ostream& err = std::cerr) {
  std::vector<std::string> files;
  try {
    for (const auto& entry :
         std::filesystem::directory_iterator(opt.directory))
      if (entry.path().extension() == ".json")
        files.push_back(entry.path().string());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    err << "error: no .json scenarios in " << opt.directory << "\n";
    return 1;
  }

  std::vector<BatchRow> rows(files.size());
  const int jobs = std::max(1, opt.jobs);
  std::size_t next = 0;
  while (next < files.size()) {
    std::vector<std::future<BatchRow>> batch;
    for (int j = 0; j < jobs && next < files.size(); ++j, ++next)
      batch.push_back(std::async(std::launch::async, run_batch_scenario,
                                 files[next], opt));
    for (std::size_t j = 0; j < batch.size(); ++j)
      rows[next - batch.size() + j] = batch[j].get();
  }

  std::string csv =
      "scenario,ms_per_planned_s,solved,corridors,n_change,J,collision\n";
  double ms_sum = 0.0;
  int solved = 0, collided = 0, closed_runs = 0;
  for (const BatchRow& r : rows) {
    csv += r.name + ",";
    csv += r.solved ? io::fmt9(r.ms_per_planned_s) : "";
    csv += ",";
    csv += r.solved ? "1" : "0";
    csv += "," + std::to_string(r.corridors);
    csv += "," + std::to_string(r.n_change);
    csv += "," + (r.solved ? io::fmt9(r.J) : std::string(""));
    csv += "," + (r.collided < 0 ? std::string("") : std::to_string(r.collided));
    csv += "\n";
    if (r.solved) {
      ms_sum += r.ms_per_planned_s;
      ++solved;
    }
    if (r.collided >= 0) {
      ++closed_runs;
      collided += r.collided;
    }
  }
  csv += "aggregate,";
  csv += solved > 0 ? io::fmt9(ms_sum / solved) : "";
  csv += "," + io::fmt9(100.0 * solved / static_cast<double>(rows.size())) +
         "%,,,";
  csv += ",";
  if (closed_runs > 0)
    csv += io::fmt9(100.0 * collided / static_cast<double>(closed_runs)) + "%";
  csv += "\n";

  const std::string out_path =
      opt.out_csv.empty()
          ? (std::filesystem::path(opt.directory) / "batch_metrics.csv").string()
          : opt.out_csv;
  io::write_file(out_path, csv);
  std::cout << csv;
  return 0;
}

struct SimulateOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  ConfigOverrides overrides;
  double horizon = 3.0;
  double replan = 0.3;
  unsigned seed = 0;
};

inline int cmd_simulate(const SimulateOptions& opt,
                        std::ostream& err = std::cerr) {
  Scenario sc;
  try {
    sc = io::load_scenario_file(opt.scenario_path);
    opt.overrides.apply(sc);
    sc.validate();
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const SimLog log =
      run_closed_loop(sc, opt.horizon, opt.replan, 0.01, opt.seed);
  std::filesystem::create_directories(opt.out_dir);
  const std::string base =
      (std::filesystem::path(opt.out_dir) / stem_of(opt.scenario_path))
          .string();
  io::write_file(base + "_simlog.csv", io::simlog_csv(log));
  io::write_file(base + "_summary.json",
                 io::summary_json(log.summary).dump(2) + "\n");
  std::cout << io::summary_json(log.summary).dump(2) << "\n";
  return 0;
}

inline int cmd_check(const std::string& scenario_path,
                     std::ostream& err = std::cerr) {
  try {
    const Scenario sc = io::load_scenario_file(scenario_path);
    sc.validate();
  } catch (const ScenarioError& e) {
    err << "invalid: " << e.what() << "\n";
    return 1;
  }
  std::cout << "ok: " << scenario_path << "\n";
  return 0;
}

}  // namespace cli
}  // namespace reachplan
