// reachplan: drivable-corridor planning over lanelet networks.
//
//   reachplan plan <scenario.json> [--svg --times 0,1,2 --out DIR ...]
//   reachplan batch <directory> [--jobs N --closed-loop ...]
//   reachplan simulate <scenario.json> [--horizon 3 --replan 0.3 ...]
//   reachplan check <scenario.json>

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reachplan/cli.hpp"

namespace {

void add_override_flags(CLI::App* app, reachplan::cli::ConfigOverrides& ov) {
  app->add_option("--dt", ov.dt, "planner time step [s]");
  app->add_option("--dmin", ov.d_min, "minimum safe distance [m]");
  app->add_option("--ades", ov.a_des, "desired acceleration [m/s^2]");
  app->add_option("--wchange", ov.w_change, "lane-change cost weight");
  app->add_option("--wprofile", ov.w_profile, "profile-deviation cost weight");
  app->add_option("--timeout", ov.timeout, "search time budget [s]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drivable-corridor planner"};
  app.require_subcommand(1);

  unsigned seed = 0;
  app.add_option("--seed", seed,
                 "seed recorded with simulation outputs (runs are "
                 "deterministic)");

  reachplan::cli::PlanOptions plan_opt;
  CLI::App* plan = app.add_subcommand("plan", "plan a single scenario");
  plan->add_option("scenario", plan_opt.scenario_path, "scenario file")
      ->required();
  plan->add_option("-o,--out", plan_opt.out_dir, "output directory");
  plan->add_flag("--svg", plan_opt.svg, "write an SVG rendering");
  plan->add_option("--times", plan_opt.times,
                   "snapshot times for the SVG [s]")
      ->delimiter(',');
  plan->add_option("--scale", plan_opt.scale, "SVG pixels per meter");
  add_override_flags(plan, plan_opt.overrides);

  reachplan::cli::BatchOptions batch_opt;
  CLI::App* batch = app.add_subcommand("batch", "plan a directory of scenarios");
  batch->add_option("directory", batch_opt.directory, "scenario directory")
      ->required();
  batch->add_option("-o,--out", batch_opt.out_csv, "metrics CSV path");
  batch->add_option("--jobs", batch_opt.jobs, "parallel scenario runs");
  batch->add_flag("--closed-loop", batch_opt.closed_loop,
                  "also run the closed-loop simulation");
  batch->add_option("--horizon", batch_opt.horizon, "plan horizon [s]");
  batch->add_option("--replan", batch_opt.replan, "replan period [s]");
  add_override_flags(batch, batch_opt.overrides);

  reachplan::cli::SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand("simulate", "closed-loop simulation");
  sim->add_option("scenario", sim_opt.scenario_path, "scenario file")
      ->required();
  sim->add_option("-o,--out", sim_opt.out_dir, "output directory");
  sim->add_option("--horizon", sim_opt.horizon, "plan horizon [s]");
  sim->add_option("--replan", sim_opt.replan, "replan period [s]");
  add_override_flags(sim, sim_opt.overrides);

  std::string check_path;
  CLI::App* check = app.add_subcommand("check", "validate a scenario file");
  check->add_option("scenario", check_path, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  batch_opt.seed = seed;
  sim_opt.seed = seed;

  if (plan->parsed()) return reachplan::cli::cmd_plan(plan_opt);
  if (batch->parsed()) return reachplan::cli::cmd_batch(batch_opt);
  if (sim->parsed()) return reachplan::cli::cmd_simulate(sim_opt);
  if (check->parsed()) return reachplan::cli::cmd_check(check_path);
  return 1;
}
