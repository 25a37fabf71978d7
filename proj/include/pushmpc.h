#ifndef PUSHMPC_H
#define PUSHMPC_H

/* C interface to the pushing-controller stack: build or load a run
 * configuration, execute the scenario it describes, and collect metrics and
 * log files. Handles are opaque; every handle is independent, so distinct
 * handles may be used from distinct threads. Functions that can fail take an
 * optional error buffer (pass NULL/0 to ignore the message). */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pm_status {
  PM_OK = 0,
  PM_ERR_ARG = 1,      /* null handle or invalid argument */
  PM_ERR_CONFIG = 2,   /* unknown key, bad value, or inconsistent config */
  PM_ERR_IO = 3,       /* a file could not be read or written */
  PM_ERR_TASK = 4,     /* the run executed but missed its goal */
  PM_ERR_INTERNAL = 5  /* unexpected failure inside the library */
} pm_status;

typedef struct pm_config pm_config;
typedef struct pm_run pm_run;

/* Scalar summary of one executed run; mirrors the metrics file. */
typedef struct pm_metrics {
  int task_success;
  int steps;                   /* closed-loop control steps */
  double sim_duration;         /* simulated seconds */
  double wall_time_s;
  double final_avg_object_position_error; /* mean over the last fifth, m */
  double final_position_error;            /* m */
  double final_orientation_error_deg;
  double max_lateral_offset;   /* largest contact offset seen, m */
  int contact_break_count;
  int slip_step_count;
  int fallback_count;
  double mean_solve_ms;
  double max_solve_ms;
  double mean_control_step_ms;
  double min_force_component;  /* N, over every plant resolution */
  double max_stick_residual;   /* m/s, over stick-mode rows */
  double min_contact_power;    /* W, wrench dot object twist */
} pm_metrics;

/* Library version, "major.minor.patch". */
const char* pm_version(void);

/* Human readable name for a status code. */
const char* pm_status_str(pm_status s);

/* Fresh configuration holding the built-in defaults, or NULL on allocation
 * failure. Destroy with pm_config_destroy (NULL is tolerated). */
pm_config* pm_config_create(void);
void pm_config_destroy(pm_config* cfg);

/* Applies the key = value lines of a file on top of the current state. */
pm_status pm_config_load(pm_config* cfg, const char* path,
                         char* err, size_t err_len);

/* Sets one key. Keys and value formats are those of the config file. */
pm_status pm_config_set(pm_config* cfg, const char* key, const char* value,
                        char* err, size_t err_len);

/* Writes the full configuration as parseable key = value text. Fails with
 * PM_ERR_ARG if the buffer cannot hold it (a few KiB suffice). */
pm_status pm_config_text(const pm_config* cfg, char* out, size_t out_len);

/* A run bound to a snapshot of cfg taken here. NULL on allocation failure. */
pm_run* pm_run_create(const pm_config* cfg);
void pm_run_destroy(pm_run* run);

/* Executes the configured scenario. PM_OK when the task succeeded,
 * PM_ERR_TASK when it completed but missed its goal (see
 * pm_run_failure_reason), PM_ERR_CONFIG when the configuration does not
 * describe a runnable experiment. */
pm_status pm_run_execute(pm_run* run, char* err, size_t err_len);

/* Copies the metrics of an executed run into *out. */
pm_status pm_run_metrics(const pm_run* run, pm_metrics* out);

/* Why the run failed; empty string when it succeeded or has not executed.
 * The pointer stays valid until the run handle is destroyed. */
const char* pm_run_failure_reason(const pm_run* run);

/* Writes log.csv, metrics.txt, and config.txt into dir (created if needed).
 * Valid after execution, including failed runs. */
pm_status pm_run_write_outputs(const pm_run* run, const char* dir,
                               char* err, size_t err_len);

#ifdef __cplusplus
}
#endif

#endif /* PUSHMPC_H */
