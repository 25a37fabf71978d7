#pragma once

#include "pushmpc/pushing_model.hpp"
#include "pushmpc/robot_dynamics.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

/// Nonnegative least squares, min ||a x - b|| subject to x >= 0, solved with
/// the Lawson-Hanson active-set scheme.
VecX nnls_solve(const MatX& a, const VecX& b);

struct ObjectPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Everything the simulator integrates: the robot (v, w hold the currently
/// applied command) and the pushed object's planar pose.
struct WorldState {
  RobotState robot;
  ObjectPose object;
  double time = 0.0;
};

enum class ContactMode { stick, slip, broken };

const char* contact_mode_name(ContactMode m);

/// Outcome of resolving the contact for one command.
struct ContactStatus {
  ContactMode mode = ContactMode::broken;
  ContactForces forces = ContactForces::Zero();
  Vec3 object_twist = Vec3::Zero();  ///< world twist the object moves with
  Vec3 wrench = Vec3::Zero();        ///< world force and COM torque on the object
  double residual = 0.0;             ///< twist-space force-fit residual
  double lateral_offset = 0.0;       ///< object center y in the robot frame
  double gap = 0.0;                  ///< bumper/object gap along the heading
};

struct PlantParams {
  FrictionParams friction;
  ObjectGeometry geometry;
  double bumper_offset = 0.15;      ///< robot center to bumper plane
  double bumper_half_width = 0.2;
  double gap_tol = 1e-4;            ///< larger gaps break the contact
  double align_tol = 0.05;          ///< rad of face/bumper misalignment allowed
  double stick_tol = 1e-8;          ///< force-fit residual bound for sticking
  int substeps = 10;                ///< object integration substeps per step
};

/// Object center expressed in the robot frame.
Vec2 object_in_robot_frame(const WorldState& w);

/// Signed distance between the bumper plane and the nearest point of the
/// object along the robot heading (negative means penetration).
double contact_gap(const PlantParams& p, const WorldState& w);

/// True while the geometry supports a line contact: gap within tolerance, the
/// facing side parallel to the bumper within align_tol, and the whole side on
/// the bumper laterally.
bool in_line_contact(const PlantParams& p, const WorldState& w);

/// World with the object attached: centered ahead of the robot, face flush
/// against the bumper, aligned headings.
WorldState attach_world(const PlantParams& p, const RobotState& robot);

/// Classifies the contact for a velocity command (v_r, w_r) without moving
/// anything. Sticking requires the nonnegative cone forces to reproduce the
/// rigid-coupled object twist through the limit surface; a nonzero force fit
/// with a larger residual slips with the twist the forces do produce; a zero
/// force fit for a nonzero demanded twist (e.g. reversing) breaks the contact,
/// as does losing line-contact geometry.
ContactStatus resolve_contact(const PlantParams& p, const WorldState& w,
                              const Vec2& cmd);

/// Advances the world by dt under a constant velocity command: the robot pose
/// follows the exact arc, the object follows its resolved twist in `substeps`
/// increments (rigidly attached while sticking), and any penetration left by
/// the discretization is projected out along the robot heading. Returns the
/// status resolved at the start of the step, whose forces act over it.
ContactStatus step_world(const PlantParams& p, WorldState& w, const Vec2& cmd,
                         double dt);

}  // namespace pushmpc
