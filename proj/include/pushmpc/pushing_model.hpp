#pragma once

#include "pushmpc/types.hpp"

namespace pushmpc {

/// Friction coefficients and support load of the pushed object.
struct FrictionParams {
  double mu_contact = 0.3;   ///< bumper/object Coulomb coefficient
  double mu_support = 0.3;   ///< object/ground Coulomb coefficient
  double object_mass = 1.0;  ///< kg
  double gravity = 9.81;     ///< m/s^2
};

/// Square object footprint, side length 2*half_side, COM at the center.
struct ObjectGeometry {
  double half_side = 0.1;  ///< m
};

/// Contact force components, ordered [f1R, f1L, f2R, f2L].
/// Point 1 and point 2 are the two extremes of the line contact between the
/// bumper and the object side; R/L are the edges of the friction cone at each
/// point, rotated -theta_mu / +theta_mu from the pushing direction.
using ContactForces = Vec4;

/// Ellipsoidal limit surface of the object/ground friction wrench.
struct LimitSurface {
  double f_max = 0.0;   ///< max friction force magnitude, mu_support*m*g
  double tau_max = 0.0; ///< max friction torque, f_max*c
  double c = 0.0;       ///< mean contact-point distance from COM, m
  Mat3 h = Mat3::Zero();///< twist = h * wrench
};

/// Half-angle of the contact friction cone, atan(mu).
/// Throws std::domain_error for non-positive mu.
double friction_half_angle(double mu);

/// Maps cone-edge force components to the wrench on the object, expressed in
/// the world frame with torque about the object COM:
///   wrench = G(theta_r) * f_c.
/// theta_r is the pushing direction (robot heading), theta_mu the friction
/// cone half-angle, half_side the object's half side length.
Mat34 grasp_matrix(double theta_r, double theta_mu, double half_side);

/// Derivative of grasp_matrix with respect to the pushing direction theta_r.
/// The torque row is invariant under rotation of the pushing frame, so only
/// the force rows contribute.
Mat34 grasp_matrix_dtheta(double theta_r, double theta_mu, double half_side);

/// Builds the ellipsoidal limit surface for a uniform-pressure square
/// footprint. The torque scale uses the mean distance from the COM, computed
/// by composite Gauss-Legendre quadrature over the footprint.
LimitSurface limit_surface(const FrictionParams& fp, const ObjectGeometry& geom);

/// Quasistatic object twist [xdot_o, ydot_o, thetadot_o] produced by contact
/// forces f_c applied through grasp matrix g.
Vec3 object_twist(const LimitSurface& ls, const Mat34& g, const ContactForces& f);

}  // namespace pushmpc
