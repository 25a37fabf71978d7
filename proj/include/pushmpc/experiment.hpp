#pragma once

#include <string>
#include <vector>

#include "pushmpc/mpc_controller.hpp"
#include "pushmpc/plant_sim.hpp"
#include "pushmpc/reference_gen.hpp"

namespace pushmpc {

/// One push of a manipulation plan: an optional arc followed by an optional
/// straight leg, driven with the bumper against the given object face. A zero
/// radius or sweep skips the arc, a zero line length skips the straight leg.
struct PushSpec {
  int side = 0;         ///< object face index, 0..3
  double radius = 0.0;  ///< arc radius, m
  double sweep = 0.0;   ///< signed arc sweep, rad (positive bends left)
  double line = 0.0;    ///< straight length after the arc, m
};

/// Everything a run needs, line tracking and manipulation alike. Loadable
/// from a flat key=value file; config_text() lists every accepted key with
/// its current value.
struct ExperimentConfig {
  std::string scenario = "line_track";  ///< "line_track" or "manipulate"

  // controller
  double ts = 0.1;
  int horizon = 10;
  Weights weights;
  ControllerLimits limits;
  QpSettings qp;
  bool constraint_enabled = true;  ///< include the non-slip coupling rows
  double constraint_tol = 1e-4;

  // contact physics, shared by the controller model and the plant
  FrictionParams friction;
  ObjectGeometry geometry;
  double bumper_offset = 0.15;
  double bumper_half_width = 0.2;
  double gap_tol = 1e-4;
  double align_tol = 0.05;
  double stick_tol = 1e-8;
  int substeps = 10;

  // line tracking scenario
  double phi = 0.2;  ///< initial lateral offset of the robot, m
  double line_length = 5.0;  ///< long enough for both modes to reach steady state
  double line_v_max = 0.15;
  double line_a_max = 0.1;

  // manipulation scenario
  double goal_x = 1.65;
  double goal_y = 0.15;
  double goal_theta = 3.14159265358979323846;
  double goal_pos_tol = 0.10;        ///< success threshold on position, m
  double goal_angle_tol_deg = 5.0;   ///< success threshold on orientation
  double push_v_max = 0.15;
  double push_a_max = 0.1;
  std::vector<PushSpec> pushes = {
      {2, 1.1, 1.57079632679489661923, 0.15},
      {0, 1.6, 1.57079632679489661923, 0.0},
      {2, 0.0, 0.0, 1.05},
  };
  ManeuverParams maneuver;  ///< contact_distance/circumradius are overridden
                            ///< from the geometry at run time

  double settle_time = 2.0;  ///< extra at-rest tracking after each path ends
  unsigned long seed = 0;    ///< recorded with the run; the stack itself is
                             ///< deterministic and draws no random numbers
};

/// Applies one key=value pair. Throws std::runtime_error on an unknown key or
/// an unparseable value; both name the offending key.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

/// Applies key=value lines on top of cfg ('#' starts a comment, blank lines
/// are skipped). Throws std::runtime_error naming the offending line.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

/// apply_config_text on top of a default-constructed config.
ExperimentConfig parse_config_text(const std::string& text);

/// parse_config_text over the contents of a file. Throws std::runtime_error
/// if the file cannot be read.
ExperimentConfig load_config(const std::string& path);

/// Serializes cfg as key=value lines that parse back to an identical config;
/// doubles are printed with enough digits for an exact round trip.
std::string config_text(const ExperimentConfig& cfg);

/// One log row per plant step. Closed-loop rows carry the controller's
/// decision; open-loop maneuver rows have qp_status "skipped" and zero input.
struct LogRow {
  double t = 0.0;
  RobotState robot;
  ObjectPose object;
  ErrorState e = ErrorState::Zero();
  Vec2 u = Vec2::Zero();
  ContactForces forces = ContactForces::Zero();
  ContactMode mode = ContactMode::broken;
  double lateral_offset = 0.0;
  std::string qp_status;  ///< optimal | max_iters | infeasible | skipped
  int qp_iters = 0;
  double solve_ms = 0.0;
};

struct RunMetrics {
  bool task_success = false;
  std::string failure_reason;  ///< empty on success

  double sim_duration = 0.0;  ///< simulated seconds
  double wall_time_s = 0.0;   ///< wall clock of the whole run
  int steps = 0;              ///< closed-loop control steps

  /// Mean object position error over the last fifth of the closed-loop rows,
  /// measured against the object's reference (the robot reference shifted one
  /// contact distance along its heading).
  double final_avg_object_position_error = 0.0;
  double final_position_error = 0.0;       ///< at the end, m
  double final_orientation_error_deg = 0.0;
  double max_lateral_offset = 0.0;  ///< over rows in contact

  int contact_break_count = 0;  ///< transitions into broken during pushes
  int slip_step_count = 0;      ///< closed-loop rows in slip
  int fallback_count = 0;       ///< controller steps that used the fallback

  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  double mean_control_step_ms = 0.0;  ///< references + controller + plant

  // physics health over all rows, maneuvers included
  double min_force_component = 0.0;
  double max_stick_residual = 0.0;
  double min_contact_power = 0.0;  ///< wrench dot object twist, W
};

struct RunResult {
  RunMetrics metrics;
  std::vector<LogRow> log;
};

/// CSV serialization of the log, one header line plus one line per row,
/// doubles printed with %.17g so a reload is bit exact.
std::string csv_string(const std::vector<LogRow>& log);
void write_csv(const std::string& path, const std::vector<LogRow>& log);
void write_metrics(const std::string& path, const RunMetrics& m,
                   const ExperimentConfig& cfg);

/// Closed-loop line tracking: the robot starts attached but offset `phi`
/// laterally from a straight reference and pushes the object while converging
/// onto the line. Runs until the reference ends plus settle_time.
RunResult run_line_tracking(const ExperimentConfig& cfg);

/// Executes cfg.pushes in order. The robot starts attached for the first
/// push; before each later push it runs an open-loop repositioning maneuver
/// (retreat, transfer arc, slow approach) built from the measured object
/// pose. Each push tracks its planned path closed loop. Fails (with a
/// diagnostic in failure_reason) if a maneuver does not re-establish contact.
RunResult run_manipulation(const ExperimentConfig& cfg);

/// Dispatches on cfg.scenario. Throws std::runtime_error on an unknown one.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace pushmpc
