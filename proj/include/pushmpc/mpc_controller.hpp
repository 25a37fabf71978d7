#pragma once

#include <span>
#include <vector>

#include "pushmpc/ltv_model.hpp"
#include "pushmpc/pushing_model.hpp"
#include "pushmpc/qp_solver.hpp"
#include "pushmpc/robot_dynamics.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

/// Width of one per-step decision block [a_r, eps_r, f1R, f1L, f2R, f2L].
inline constexpr int kDecisionBlock = 6;

/// Diagonal weights of the tracking cost. q_error/p_terminal act on the
/// five error components, r_input/r_rate on a full decision block.
struct Weights {
  Vec5 q_error = (Vec5() << 15.0, 20.0, 5.0, 1.0, 1.0).finished();
  Vec5 p_terminal = 50.0 * (Vec5() << 15.0, 20.0, 5.0, 1.0, 1.0).finished();
  Vec6 r_input = (Vec6() << 0.1, 0.1, 1e-3, 1e-3, 1e-3, 1e-3).finished();
  Vec6 r_rate = (Vec6() << 0.1, 0.1, 0.0, 0.0, 0.0, 0.0).finished();
};

/// Box and per-step rate limits on the decision variables. The rate window
/// of a channel is rate_factor times its magnitude bound.
struct ControllerLimits {
  double accel_max = 0.3;   ///< |a_r| bound, m/s^2
  double alpha_max = 0.5;   ///< |eps_r| bound, rad/s^2
  double force_max = 50.0;  ///< upper bound per cone-edge component
  double rate_factor = 10.0;
};

struct ControllerConfig {
  Weights weights;
  ControllerLimits limits;
  int horizon = 10;
  double ts = 0.1;
  FrictionParams friction;
  ObjectGeometry geometry;
  double constraint_tol = 1e-4;    ///< band sigma on the coupling residual
  bool pushing_constraint = true;  ///< include the non-slip rows
  QpSettings qp;
};

/// Stacked-decision form of the error prediction over a horizon of p steps:
///   e_i = s_e[i] * z + c_e[i],  z = [w_0; ...; w_{p-1}],  w_i in R^6.
/// s_e[0] is zero and c_e[0] the measured error. Only the first two entries
/// of each block (the accelerations) drive the dynamics.
struct CondensedPrediction {
  std::vector<MatX> s_e;
  std::vector<Vec5> c_e;
};

CondensedPrediction condense_dynamics(const std::vector<LtvStepModel>& models,
                                      const ErrorState& e0,
                                      const std::vector<Vec4>& disturbances);

/// Tracking cost over the stacked decision,
///   J(z) = sum_{i=1}^{p-1} e_i'Q e_i + e_p'P e_p
///        + sum_{i=0}^{p-1} w_i'R w_i + dw_i'R_d dw_i,
/// with dw_i = w_i - w_{i-1} and w_{-1} = prev_w, returned in the solver's
/// form J(z) = 0.5 z'p z + q'z + constant.
struct CondensedCost {
  MatX p;
  VecX q;
  double constant = 0.0;
};

CondensedCost build_condensed_cost(const CondensedPrediction& pred,
                                   const Weights& w, const Vec6& prev_w);

/// Linearized rigid-coupling constraint m z <= b. Over every interval the
/// twist the robot imparts on the object must match the limit-surface flow of
/// the contact forces. The plant holds the velocities reached at step i+1
/// across interval i, so block i couples f_i to the successor state:
///   g_i(z) = C(e_{i+1}) - H G(theta_{i+1}) f_i,  |g_i| <= sigma per row,
/// where C is the object twist under rigid attachment at offset p_or (object
/// center in the robot frame, held constant over the horizon) and theta_{i+1}
/// the predicted heading. Each block contributes the rows J_i z <= J_i z~ -
/// g_i(z~) + sigma and their negations, linearized at the nominal z~. refs
/// must hold p + 1 samples (one per step boundary).
struct PushingConstraint {
  MatX m;  ///< 6p x 6p, rows grouped per step as [J_i; -J_i]
  VecX b;
};

PushingConstraint build_pushing_constraints(
    const CondensedPrediction& pred, std::span<const ReferenceSample> refs,
    const VecX& z_nom, const Vec2& p_or, const LimitSurface& ls,
    double theta_mu, double half_side, double sigma);

/// Outcome of one control step. vel_cmd is the velocity command obtained by
/// integrating the applied accelerations over one sample interval; a plant
/// tracking velocity commands should switch to it for the coming interval.
struct ControlDecision {
  Vec2 u = Vec2::Zero();
  Vec2 vel_cmd = Vec2::Zero();
  ContactForces forces = ContactForces::Zero();
  VecX plan;  ///< full stacked decision (empty on fallback)
  QpStatus status = QpStatus::optimal;
  int qp_iterations = 0;
  bool fallback = false;
};

/// Receding-horizon tracking controller. Each step relinearizes the error
/// dynamics along the warm-started nominal trajectory, condenses the
/// prediction into a dense QP over accelerations and contact forces, and
/// solves it warm started from the previous shifted solution. An infeasible
/// QP falls back to braking toward rest within the input limits with zero
/// forces.
class MpcController {
 public:
  explicit MpcController(const ControllerConfig& cfg);

  /// Forgets the warm start and the previous input.
  void reset();

  /// refs must hold at least horizon + 1 samples starting at the current
  /// time, one per step boundary.
  ControlDecision step(const RobotState& measured, const Vec2& p_or,
                       std::span<const ReferenceSample> refs);

  const ControllerConfig& config() const { return cfg_; }
  const LimitSurface& surface() const { return ls_; }

 private:
  ControllerConfig cfg_;
  LimitSurface ls_;
  double theta_mu_;
  VecX z_warm_;
  Vec6 prev_w_ = Vec6::Zero();
  bool has_warm_ = false;
};

}  // namespace pushmpc
