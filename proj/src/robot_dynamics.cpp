#include "pushmpc/robot_dynamics.hpp"

#include <cassert>
#include <cmath>

namespace pushmpc {

Vec4 disturbance(const ReferenceSample& ref) {
  return Vec4(ref.v, ref.w, ref.a, ref.eps);
}

ErrorState error_from_state(const RobotState& state, const ReferenceSample& ref) {
  const Vec2 dp(state.x - ref.x, state.y - ref.y);
  const Vec2 ep = rotation2(ref.theta).transpose() * dp;
  ErrorState e;
  e << ep.x(), ep.y(), wrap_angle(state.theta - ref.theta), state.v - ref.v,
      state.w - ref.w;
  return e;
}

RobotState state_from_error(const ErrorState& e, const ReferenceSample& ref) {
  const Vec2 dp = rotation2(ref.theta) * Vec2(e[0], e[1]);
  RobotState s;
  s.x = ref.x + dp.x();
  s.y = ref.y + dp.y();
  s.theta = ref.theta + e[2];
  s.v = ref.v + e[3];
  s.w = ref.w + e[4];
  return s;
}

ErrorState error_dynamics_rhs(const ErrorState& e, const ControlInput& u,
                              const Vec4& v) {
  const double v_rd = v[0], w_rd = v[1], vdot_rd = v[2], wdot_rd = v[3];
  const double ce = std::cos(e[2]), se = std::sin(e[2]);
  ErrorState f;
  f[0] = ce * (e[3] + v_rd) - v_rd + e[1] * w_rd;
  f[1] = se * (e[3] + v_rd) - e[0] * w_rd;
  f[2] = e[4];
  f[3] = u[0] - vdot_rd;
  f[4] = u[1] - wdot_rd;
  return f;
}

std::vector<ErrorState> predict_nominal(const ErrorState& e0,
                                        std::span<const ReferenceSample> refs,
                                        std::span<const ControlInput> inputs,
                                        double ts) {
  assert(refs.size() >= inputs.size());
  assert(ts > 0.0);
  std::vector<ErrorState> traj;
  traj.reserve(inputs.size() + 1);
  traj.push_back(e0);
  for (size_t i = 0; i < inputs.size(); ++i) {
    const Vec4 v = disturbance(refs[i]);
    const ControlInput& u = inputs[i];
    const ErrorState& e = traj.back();
    const ErrorState k1 = error_dynamics_rhs(e, u, v);
    const ErrorState k2 = error_dynamics_rhs(e + 0.5 * ts * k1, u, v);
    const ErrorState k3 = error_dynamics_rhs(e + 0.5 * ts * k2, u, v);
    const ErrorState k4 = error_dynamics_rhs(e + ts * k3, u, v);
    traj.push_back(e + (ts / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  }
  return traj;
}

}  // namespace pushmpc
