#include "pushmpc.h"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pushmpc/experiment.hpp"

struct pm_config {
  pushmpc::ExperimentConfig cfg;
};

struct pm_run {
  pushmpc::ExperimentConfig cfg;
  pushmpc::RunResult result;
  bool executed = false;
};

namespace {

void put_err(char* err, size_t err_len, const std::string& msg) {
  if (err && err_len) std::snprintf(err, err_len, "%s", msg.c_str());
}

}  // namespace

extern "C" {

const char* pm_version(void) { return "1.0.0"; }

const char* pm_status_str(pm_status s) {
  switch (s) {
    case PM_OK: return "ok";
    case PM_ERR_ARG: return "invalid argument";
    case PM_ERR_CONFIG: return "bad configuration";
    case PM_ERR_IO: return "io error";
    case PM_ERR_TASK: return "task failed";
    case PM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pm_config* pm_config_create(void) { return new (std::nothrow) pm_config(); }

void pm_config_destroy(pm_config* cfg) { delete cfg; }

pm_status pm_config_load(pm_config* cfg, const char* path, char* err,
                         size_t err_len) {
  if (!cfg || !path) {
    put_err(err, err_len, "null argument");
    return PM_ERR_ARG;
  }
  std::ifstream in(path);
  if (!in) {
    put_err(err, err_len, std::string("cannot read config file '") + path +
                              "'");
    return PM_ERR_IO;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  // Apply onto a copy so a bad line cannot leave the handle half updated.
  pushmpc::ExperimentConfig next = cfg->cfg;
  try {
    pushmpc::apply_config_text(next, buf.str());
  } catch (const std::exception& e) {
    put_err(err, err_len, e.what());
    return PM_ERR_CONFIG;
  }
  cfg->cfg = std::move(next);
  return PM_OK;
}

pm_status pm_config_set(pm_config* cfg, const char* key, const char* value,
                        char* err, size_t err_len) {
  if (!cfg || !key || !value) {
    put_err(err, err_len, "null argument");
    return PM_ERR_ARG;
  }
  try {
    pushmpc::apply_config_entry(cfg->cfg, key, value);
  } catch (const std::exception& e) {
    put_err(err, err_len, e.what());
    return PM_ERR_CONFIG;
  }
  return PM_OK;
}

pm_status pm_config_text(const pm_config* cfg, char* out, size_t out_len) {
  if (!cfg || !out) return PM_ERR_ARG;
  const std::string text = pushmpc::config_text(cfg->cfg);
  if (text.size() + 1 > out_len) return PM_ERR_ARG;
  std::snprintf(out, out_len, "%s", text.c_str());
  return PM_OK;
}

pm_run* pm_run_create(const pm_config* cfg) {
  if (!cfg) return nullptr;
  pm_run* run = new (std::nothrow) pm_run();
  if (run) run->cfg = cfg->cfg;
  return run;
}

void pm_run_destroy(pm_run* run) { delete run; }

pm_status pm_run_execute(pm_run* run, char* err, size_t err_len) {
  if (!run) {
    put_err(err, err_len, "null run");
    return PM_ERR_ARG;
  }
  try {
    run->result = pushmpc::run_experiment(run->cfg);
    run->executed = true;
  } catch (const std::runtime_error& e) {
    put_err(err, err_len, e.what());
    return PM_ERR_CONFIG;
  } catch (const std::exception& e) {
    put_err(err, err_len, e.what());
    return PM_ERR_INTERNAL;
  }
  if (!run->result.metrics.task_success) {
    put_err(err, err_len, run->result.metrics.failure_reason);
    return PM_ERR_TASK;
  }
  return PM_OK;
}

pm_status pm_run_metrics(const pm_run* run, pm_metrics* out) {
  if (!run || !out || !run->executed) return PM_ERR_ARG;
  const pushmpc::RunMetrics& m = run->result.metrics;
  out->task_success = m.task_success ? 1 : 0;
  out->steps = m.steps;
  out->sim_duration = m.sim_duration;
  out->wall_time_s = m.wall_time_s;
  out->final_avg_object_position_error = m.final_avg_object_position_error;
  out->final_position_error = m.final_position_error;
  out->final_orientation_error_deg = m.final_orientation_error_deg;
  out->max_lateral_offset = m.max_lateral_offset;
  out->contact_break_count = m.contact_break_count;
  out->slip_step_count = m.slip_step_count;
  out->fallback_count = m.fallback_count;
  out->mean_solve_ms = m.mean_solve_ms;
  out->max_solve_ms = m.max_solve_ms;
  out->mean_control_step_ms = m.mean_control_step_ms;
  out->min_force_component = m.min_force_component;
  out->max_stick_residual = m.max_stick_residual;
  out->min_contact_power = m.min_contact_power;
  return PM_OK;
}

const char* pm_run_failure_reason(const pm_run* run) {
  if (!run) return "";
  return run->result.metrics.failure_reason.c_str();
}

pm_status pm_run_write_outputs(const pm_run* run, const char* dir, char* err,
                               size_t err_len) {
  if (!run || !dir) {
    put_err(err, err_len, "null argument");
    return PM_ERR_ARG;
  }
  if (!run->executed) {
    put_err(err, err_len, "run has not executed");
    return PM_ERR_ARG;
  }
  try {
    const std::filesystem::path base(dir);
    std::filesystem::create_directories(base);
    pushmpc::write_csv((base / "log.csv").string(), run->result.log);
    pushmpc::write_metrics((base / "metrics.txt").string(),
                           run->result.metrics, run->cfg);
    std::ofstream out(base / "config.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config.txt");
    out << pushmpc::config_text(run->cfg);
  } catch (const std::exception& e) {
    put_err(err, err_len, e.what());
    return PM_ERR_IO;
  }
  return PM_OK;
}

}  // extern "C"
