#pragma once

#include "pushmpc/robot_dynamics.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

/// One step of the discrete linear time-varying error model
///   e[k+1] = a_d * e[k] + bu_d * u[k] + bv_d * v[k].
struct LtvStepModel {
  Mat5 a_d = Mat5::Identity();
  Mat52 bu_d = Mat52::Zero();
  Mat54 bv_d = Mat54::Zero();
};

/// Jacobian of the error dynamics with respect to the error state, evaluated
/// at (e, v). The input enters affinely and drops out of this Jacobian.
Mat5 jacobian_a(const ErrorState& e, const Vec4& v);

/// Jacobian of the error dynamics with respect to the measured disturbance.
Mat54 jacobian_bv(const ErrorState& e, const Vec4& v);

/// Constant input matrix of the error dynamics.
Mat52 input_matrix();

/// Zero-order-hold discretization over ts:
///   a_d = exp(a_c ts),  b*_d = (integral of exp(a_c tau) dtau) * b*_c,
/// with the integral obtained from the augmented-matrix exponential.
LtvStepModel discretize(const Mat5& a_c, const Mat52& bu_c, const Mat54& bv_c,
                        double ts);

/// Convenience: linearize at (e, v) and discretize over ts.
LtvStepModel linearize_step(const ErrorState& e, const Vec4& v, double ts);

}  // namespace pushmpc
