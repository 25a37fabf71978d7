// Exercises the shared library strictly through the C header: handle
// lifecycles, error reporting, a full run, and output files.

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pushmpc.h"

namespace {

int failures = 0;

#define CHECK(cond)                                                     \
  do {                                                                  \
    if (!(cond)) {                                                      \
      std::fprintf(stderr, "capi_test:%d: CHECK failed: %s\n", __LINE__, \
                   #cond);                                              \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("pushmpc_capi_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);

  CHECK(std::strlen(pm_version()) >= 5);
  CHECK(std::strcmp(pm_status_str(PM_OK), "ok") == 0);
  CHECK(pm_status_str(PM_ERR_TASK) != nullptr);
  CHECK(pm_status_str(static_cast<pm_status>(99)) != nullptr);

  // Null arguments are rejected, never dereferenced.
  char err[512] = "";
  CHECK(pm_config_load(nullptr, "x", err, sizeof err) == PM_ERR_ARG);
  CHECK(pm_config_set(nullptr, "phi", "0.1", err, sizeof err) == PM_ERR_ARG);
  CHECK(pm_config_text(nullptr, err, sizeof err) == PM_ERR_ARG);
  CHECK(pm_run_create(nullptr) == nullptr);
  CHECK(pm_run_metrics(nullptr, nullptr) == PM_ERR_ARG);
  CHECK(std::strcmp(pm_run_failure_reason(nullptr), "") == 0);
  pm_config_destroy(nullptr);
  pm_run_destroy(nullptr);

  pm_config* cfg = pm_config_create();
  CHECK(cfg != nullptr);

  // Key errors carry the diagnostic and leave the handle usable.
  err[0] = '\0';
  CHECK(pm_config_set(cfg, "no_such_key", "1", err, sizeof err) ==
        PM_ERR_CONFIG);
  CHECK(std::strstr(err, "no_such_key") != nullptr);
  err[0] = '\0';
  CHECK(pm_config_set(cfg, "phi", "abc", err, sizeof err) == PM_ERR_CONFIG);
  CHECK(std::strstr(err, "phi") != nullptr);
  CHECK(pm_config_set(cfg, "phi", "0.05", err, sizeof err) == PM_OK);
  CHECK(pm_config_set(cfg, "line_length", "0.6", err, sizeof err) == PM_OK);
  CHECK(pm_config_set(cfg, "settle_time", "0.3", err, sizeof err) == PM_OK);

  // A missing file is an io error, a bad file a config error; neither
  // touches the handle.
  CHECK(pm_config_load(cfg, (dir / "nope.cfg").string().c_str(), err,
                       sizeof err) == PM_ERR_IO);
  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "phi = 0.4\nwibble = 1\n";
  }
  err[0] = '\0';
  CHECK(pm_config_load(cfg, (dir / "bad.cfg").string().c_str(), err,
                       sizeof err) == PM_ERR_CONFIG);
  CHECK(std::strstr(err, "wibble") != nullptr);
  {
    std::ofstream good(dir / "good.cfg");
    good << "# comment\nsubsteps = 8\n";
  }
  CHECK(pm_config_load(cfg, (dir / "good.cfg").string().c_str(), err,
                       sizeof err) == PM_OK);

  // Serialized text reloads to the identical serialization, and the failed
  // load above must not have clobbered the earlier keys.
  char text[8192];
  CHECK(pm_config_text(cfg, text, sizeof text) == PM_OK);
  CHECK(std::strstr(text, "phi = 0.05") != nullptr);
  CHECK(std::strstr(text, "substeps = 8") != nullptr);
  CHECK(pm_config_text(cfg, text, 16) == PM_ERR_ARG);
  CHECK(pm_config_text(cfg, text, sizeof text) == PM_OK);
  {
    std::ofstream echo(dir / "echo.cfg");
    echo << text;
  }
  pm_config* cfg2 = pm_config_create();
  CHECK(pm_config_load(cfg2, (dir / "echo.cfg").string().c_str(), err,
                       sizeof err) == PM_OK);
  char text2[8192];
  CHECK(pm_config_text(cfg2, text2, sizeof text2) == PM_OK);
  CHECK(std::strcmp(text, text2) == 0);
  pm_config_destroy(cfg2);

  // Full run through the C surface.
  pm_run* run = pm_run_create(cfg);
  CHECK(run != nullptr);
  pm_metrics m;
  CHECK(pm_run_metrics(run, &m) == PM_ERR_ARG);  // not executed yet
  CHECK(pm_run_write_outputs(run, (dir / "out").string().c_str(), err,
                             sizeof err) == PM_ERR_ARG);
  err[0] = '\0';
  CHECK(pm_run_execute(run, err, sizeof err) == PM_OK);
  CHECK(pm_run_metrics(run, &m) == PM_OK);
  CHECK(m.task_success == 1);
  CHECK(m.steps > 0);
  CHECK(m.sim_duration > 0.0);
  CHECK(m.contact_break_count == 0);
  CHECK(std::strcmp(pm_run_failure_reason(run), "") == 0);

  CHECK(pm_run_write_outputs(run, (dir / "out").string().c_str(), err,
                             sizeof err) == PM_OK);
  const std::string log = slurp(dir / "out" / "log.csv");
  CHECK(log.rfind("t,x_r,y_r", 0) == 0);
  CHECK(std::count(log.begin(), log.end(), '\n') ==
        static_cast<long>(m.steps) + 1);
  const std::string metrics = slurp(dir / "out" / "metrics.txt");
  CHECK(metrics.find("task_success 1") != std::string::npos);
  const std::string echoed = slurp(dir / "out" / "config.txt");
  CHECK(echoed.find("scenario = line_track") != std::string::npos);
  pm_run_destroy(run);

  // A run that executes but misses its goal reports PM_ERR_TASK with a
  // reason, and its outputs are still writable.
  CHECK(pm_config_set(cfg, "scenario", "manipulate", err, sizeof err) ==
        PM_OK);
  CHECK(pm_config_set(cfg, "push_count", "0", err, sizeof err) == PM_OK);
  CHECK(pm_config_set(cfg, "goal_x", "2.5", err, sizeof err) == PM_OK);
  pm_run* doomed = pm_run_create(cfg);
  err[0] = '\0';
  CHECK(pm_run_execute(doomed, err, sizeof err) == PM_ERR_TASK);
  CHECK(err[0] != '\0');
  CHECK(std::strlen(pm_run_failure_reason(doomed)) > 0);
  CHECK(pm_run_metrics(doomed, &m) == PM_OK);
  CHECK(m.task_success == 0);
  CHECK(pm_run_write_outputs(doomed, (dir / "failed").string().c_str(), err,
                             sizeof err) == PM_OK);
  CHECK(slurp(dir / "failed" / "metrics.txt").find("task_success 0") !=
        std::string::npos);
  pm_run_destroy(doomed);

  // An unrunnable configuration surfaces as PM_ERR_CONFIG at execute time.
  CHECK(pm_config_set(cfg, "ts", "0", err, sizeof err) == PM_OK);
  pm_run* broken = pm_run_create(cfg);
  err[0] = '\0';
  CHECK(pm_run_execute(broken, err, sizeof err) == PM_ERR_CONFIG);
  CHECK(err[0] != '\0');
  pm_run_destroy(broken);
  pm_config_destroy(cfg);

  std::filesystem::remove_all(dir);
  if (failures == 0) std::puts("capi_test: all checks passed");
  return failures == 0 ? 0 : 1;
}
