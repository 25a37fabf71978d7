// Command line front end. Talks to the library exclusively through the C
// API. Exit codes: 0 success, 2 task failure, 3 configuration problem.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "pushmpc.h"

namespace {

struct Invocation {
  std::string scenario;
  std::string config_file;
  std::string out_dir;
  std::string constraint = "on";
  double phi = 0.2;
  unsigned long seed = 0;
  bool phi_given = false;
  bool constraint_given = false;
  bool seed_given = false;
};

int run(const Invocation& inv) {
  char err[1024] = "";
  pm_config* cfg = pm_config_create();
  if (!cfg) {
    std::fprintf(stderr, "push-mpc: out of memory\n");
    return 3;
  }
  struct Guard {
    pm_config* c;
    pm_run* r = nullptr;
    ~Guard() {
      pm_run_destroy(r);
      pm_config_destroy(c);
    }
  } guard{cfg};

  auto set = [&](const char* key, const std::string& value) {
    if (pm_config_set(cfg, key, value.c_str(), err, sizeof err) != PM_OK) {
      std::fprintf(stderr, "push-mpc: %s\n", err);
      return false;
    }
    return true;
  };

  if (!inv.config_file.empty() &&
      pm_config_load(cfg, inv.config_file.c_str(), err, sizeof err) != PM_OK) {
    std::fprintf(stderr, "push-mpc: %s\n", err);
    return 3;
  }
  // Flags override the file.
  if (!set("scenario", inv.scenario)) return 3;
  if (inv.phi_given && !set("phi", std::to_string(inv.phi))) return 3;
  if (inv.constraint_given && !set("constraint_enabled", inv.constraint))
    return 3;
  if (inv.seed_given && !set("seed", std::to_string(inv.seed))) return 3;

  pm_run* run = pm_run_create(cfg);
  if (!run) {
    std::fprintf(stderr, "push-mpc: out of memory\n");
    return 3;
  }
  guard.r = run;

  const pm_status st = pm_run_execute(run, err, sizeof err);
  if (st != PM_OK && st != PM_ERR_TASK) {
    std::fprintf(stderr, "push-mpc: %s\n", err);
    return 3;
  }

  if (!inv.out_dir.empty()) {
    char werr[1024] = "";
    if (pm_run_write_outputs(run, inv.out_dir.c_str(), werr, sizeof werr) !=
        PM_OK) {
      std::fprintf(stderr, "push-mpc: %s\n", werr);
      return 3;
    }
  }

  pm_metrics m;
  pm_run_metrics(run, &m);
  std::printf(
      "%s: %s after %.1f s simulated (%d steps, %.2f s wall)\n"
      "  final position error %.4f m, final avg tracking error %.4f m\n"
      "  contact breaks %d, slip steps %d, fallbacks %d, mean step %.2f ms\n",
      inv.scenario.c_str(), m.task_success ? "success" : "task failed",
      m.sim_duration, m.steps, m.wall_time_s, m.final_position_error,
      m.final_avg_object_position_error, m.contact_break_count,
      m.slip_step_count, m.fallback_count, m.mean_control_step_ms);
  if (!inv.out_dir.empty())
    std::printf("  outputs written to %s\n", inv.out_dir.c_str());
  if (st == PM_ERR_TASK) {
    std::fprintf(stderr, "push-mpc: %s\n", pm_run_failure_reason(run));
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop pushing experiments: a unicycle robot pushes a "
               "square object along receding-horizon plans"};
  app.set_version_flag("--version", pm_version());
  app.require_subcommand(1);
  Invocation inv;

  CLI::App* line = app.add_subcommand(
      "line-track", "Track a straight line from a lateral offset");
  CLI::Option* phi_opt =
      line->add_option("--phi", inv.phi, "initial lateral offset, m");
  CLI::Option* con_opt =
      line->add_option("--constraint", inv.constraint,
                       "non-slip coupling rows: on|off")
          ->check(CLI::IsMember({"on", "off"}));

  CLI::App* manip = app.add_subcommand(
      "manipulate", "Run the configured multi-push manipulation plan");

  for (CLI::App* sub : {line, manip}) {
    sub->add_option("--config", inv.config_file,
                    "key = value configuration file");
    sub->add_option("--out", inv.out_dir, "directory for log.csv, "
                    "metrics.txt, config.txt");
    sub->add_option("--seed", inv.seed, "recorded with the run");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  inv.scenario = line->parsed() ? "line_track" : "manipulate";
  inv.phi_given = phi_opt->count() > 0;
  inv.constraint_given = con_opt->count() > 0;
  for (CLI::App* sub : {line, manip})
    if (sub->parsed() && sub->count("--seed") > 0) inv.seed_given = true;
  return run(inv);
}
