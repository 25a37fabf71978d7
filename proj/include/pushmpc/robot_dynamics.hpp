#pragma once

#include <span>
#include <vector>

#include "pushmpc/types.hpp"

namespace pushmpc {

/// Unicycle state [x, y, theta, v, w]: planar pose, forward speed, yaw rate.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double w = 0.0;
};

/// One reference trajectory sample with the feedforward derivatives needed by
/// the error dynamics.
struct ReferenceSample {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;     ///< v_rd
  double w = 0.0;     ///< w_rd
  double a = 0.0;     ///< v_rd time derivative
  double eps = 0.0;   ///< w_rd time derivative
};

/// Tracking error [e_x, e_y, e_th, e_v, e_w]: position error rotated into the
/// reference frame, wrapped attitude error, velocity errors.
using ErrorState = Vec5;

/// Control input [a_r, eps_r]: forward and angular acceleration.
using ControlInput = Vec2;

/// Measured disturbance [v_rd, w_rd, vdot_rd, wdot_rd] feeding the error
/// dynamics from the reference.
Vec4 disturbance(const ReferenceSample& ref);

/// Error of state relative to ref; attitude error wrapped to (-pi, pi].
ErrorState error_from_state(const RobotState& state, const ReferenceSample& ref);

/// Inverse of error_from_state (up to angle wrapping).
RobotState state_from_error(const ErrorState& e, const ReferenceSample& ref);

/// Continuous-time error dynamics edot = f(e, u, v).
ErrorState error_dynamics_rhs(const ErrorState& e, const ControlInput& u,
                              const Vec4& v);

/// Integrates the error dynamics with RK4, holding each step's reference and
/// input constant over its interval. Returns inputs.size()+1 states starting
/// with e0. refs must cover at least inputs.size() samples.
std::vector<ErrorState> predict_nominal(const ErrorState& e0,
                                        std::span<const ReferenceSample> refs,
                                        std::span<const ControlInput> inputs,
                                        double ts);

}  // namespace pushmpc
