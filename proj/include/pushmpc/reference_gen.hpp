#pragma once

#include <numbers>
#include <vector>

#include "pushmpc/robot_dynamics.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

/// Trapezoidal speed profile over a fixed distance: ramp at `a_max` to a peak
/// speed, optional cruise, symmetric ramp down. Degenerates to a triangle when
/// the distance is too short to reach `v_max`, and to an empty profile for
/// zero distance. Speeds and positions are nonnegative; callers apply signs.
struct TrapezoidProfile {
  double distance = 0.0;
  double a_max = 0.0;
  double peak = 0.0;      ///< achieved peak speed
  double t_ramp = 0.0;    ///< duration of each ramp
  double t_cruise = 0.0;  ///< duration of the constant-speed phase

  static TrapezoidProfile plan(double distance, double v_max, double a_max);

  double duration() const { return 2.0 * t_ramp + t_cruise; }
  double position(double t) const;
  double speed(double t) const;
  double accel(double t) const;
};

/// One piece of a reference path. `length` is meters of arc length for line
/// and arc segments and radians swept for spin segments. Arcs bend left for
/// positive curvature. Spins rotate in place in the direction of `curvature`'s
/// sign; for them `v_max`/`a_max` are rad/s and rad/s^2. Lines may be driven
/// in reverse (retreats); speed samples then come out negative.
struct PathSegment {
  enum class Kind { line, arc, spin };

  Kind kind = Kind::line;
  double length = 0.0;
  double curvature = 0.0;
  bool reverse = false;
  double v_max = 0.1;
  double a_max = 0.1;
};

/// A start pose plus segments, each with its own speed profile. The profile
/// brings the speed to zero at every segment boundary, so samples are C1
/// within segments and continuous across them.
struct ReferencePath {
  double x0 = 0.0;
  double y0 = 0.0;
  double theta0 = 0.0;
  std::vector<PathSegment> segments;
};

double path_duration(const ReferencePath& path);

/// Cumulative end time of each segment (same length as `path.segments`).
std::vector<double> segment_boundaries(const ReferencePath& path);

/// Sample pose, velocities, and feedforward accelerations at time t. Times are
/// clamped to [0, duration]; past the end the sample holds the final pose at
/// rest, which is also what horizon lookahead beyond the path sees.
ReferenceSample sample_path(const ReferencePath& path, double t);

/// Pose the path ends at.
void path_end_pose(const ReferencePath& path, double& x, double& y,
                   double& theta);

/// Average (v, w) command that moves a constant-twist integrator exactly from
/// the pose at t1 to the pose at t2. Only valid while [t1, t2] stays inside a
/// single segment (the twist direction is constant there).
Vec2 interval_twist(const ReferencePath& path, double t1, double t2);

/// Straight path of `length` meters from a start pose.
ReferencePath line_path(double x0, double y0, double theta0, double length,
                        double v_max, double a_max);

/// Geometry and speed limits for building repositioning maneuvers.
struct ManeuverParams {
  double contact_distance = 0.25;  ///< robot center to object center when attached
  double circumradius = 0.1 * std::numbers::sqrt2;
  double clearance_margin = 0.2;   ///< added to circumradius for the transfer arc
  double retreat_min = 0.3;
  double travel_v_max = 0.1;
  double travel_a_max = 0.1;
  double spin_w_max = 0.3;
  double spin_a_max = 0.3;
  double approach_speed = 0.02;
  double approach_a_max = 0.05;
};

/// Path that detaches the robot from the object and re-attaches it centered on
/// `target_side` (0..3, the object face whose outward normal is the object
/// heading plus target_side * pi/2): straight retreat, in-place turn, transfer
/// arc around the object at a clearance radius, turn to face the object, slow
/// straight approach. The retreat is lengthened automatically whenever the
/// minimum retreat would leave the transfer arc intersecting the clearance
/// circle. Ends with the bumper touching the face, zero lateral offset.
ReferencePath repositioning_maneuver(const RobotState& robot, double obj_x,
                                     double obj_y, double obj_theta,
                                     int target_side, const ManeuverParams& p);

/// Push heading for a side index: the direction the robot faces (and pushes)
/// when attached to that face.
double side_push_heading(double obj_theta, int side);

}  // namespace pushmpc
