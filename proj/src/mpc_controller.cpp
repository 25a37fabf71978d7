#include "pushmpc/mpc_controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pushmpc {
namespace {

constexpr int kB = kDecisionBlock;

/// Object twist [xdot_o, ydot_o, thetadot_o] when rigidly attached to the
/// robot at offset p_or (robot frame), for heading theta and speeds (v, w).
Vec3 attached_twist(double theta, double v, double w, const Vec2& p_or) {
  const Vec2 rp = rotation2(theta) * p_or;
  return Vec3(v * std::cos(theta) - w * rp.y(), v * std::sin(theta) + w * rp.x(),
              w);
}

/// Derivative of attached_twist with respect to [e_th, e_v, e_w] (3x3); the
/// position errors do not enter.
Mat3 attached_twist_jacobian(double theta, double v, double w, const Vec2& p_or) {
  const Vec2 rp = rotation2(theta) * p_or;
  Mat3 j = Mat3::Zero();
  j(0, 0) = -v * std::sin(theta) - w * rp.x();
  j(1, 0) = v * std::cos(theta) - w * rp.y();
  j(0, 1) = std::cos(theta);
  j(1, 1) = std::sin(theta);
  j(0, 2) = -rp.y();
  j(1, 2) = rp.x();
  j(2, 2) = 1.0;
  return j;
}

}  // namespace

CondensedPrediction condense_dynamics(const std::vector<LtvStepModel>& models,
                                      const ErrorState& e0,
                                      const std::vector<Vec4>& disturbances) {
  const int p = static_cast<int>(models.size());
  if (static_cast<int>(disturbances.size()) < p)
    throw std::invalid_argument("need one disturbance per model");
  const int n = kB * p;
  CondensedPrediction pred;
  pred.s_e.resize(p + 1);
  pred.c_e.resize(p + 1);
  pred.s_e[0] = MatX::Zero(5, n);
  pred.c_e[0] = e0;
  for (int i = 0; i < p; ++i) {
    pred.s_e[i + 1] = models[i].a_d * pred.s_e[i];
    pred.s_e[i + 1].block<5, 2>(0, kB * i) += models[i].bu_d;
    pred.c_e[i + 1] = models[i].a_d * pred.c_e[i] + models[i].bv_d * disturbances[i];
  }
  return pred;
}

CondensedCost build_condensed_cost(const CondensedPrediction& pred,
                                   const Weights& w, const Vec6& prev_w) {
  const int p = static_cast<int>(pred.s_e.size()) - 1;
  const int n = kB * p;
  MatX ph = MatX::Zero(n, n);
  VecX qh = VecX::Zero(n);
  double c0 = 0.0;
  for (int i = 1; i <= p; ++i) {
    const Vec5 wd = (i == p) ? w.p_terminal : w.q_error;
    const MatX ws = wd.asDiagonal() * pred.s_e[i];
    ph.noalias() += pred.s_e[i].transpose() * ws;
    qh.noalias() += ws.transpose() * pred.c_e[i];
    c0 += pred.c_e[i].dot(wd.asDiagonal() * pred.c_e[i]);
  }
  const Mat6 ru = w.r_input.asDiagonal();
  const Mat6 rd = w.r_rate.asDiagonal();
  for (int i = 0; i < p; ++i) {
    ph.block<kB, kB>(kB * i, kB * i) += ru;
    if (i == 0) {
      ph.block<kB, kB>(0, 0) += rd;
      qh.head<kB>() -= rd * prev_w;
      c0 += prev_w.dot(rd * prev_w);
    } else {
      ph.block<kB, kB>(kB * i, kB * i) += rd;
      ph.block<kB, kB>(kB * (i - 1), kB * (i - 1)) += rd;
      ph.block<kB, kB>(kB * i, kB * (i - 1)) -= rd;
      ph.block<kB, kB>(kB * (i - 1), kB * i) -= rd;
    }
  }
  CondensedCost cost;
  cost.p = 2.0 * ph;
  cost.q = 2.0 * qh;
  cost.constant = c0;
  return cost;
}

PushingConstraint build_pushing_constraints(
    const CondensedPrediction& pred, std::span<const ReferenceSample> refs,
    const VecX& z_nom, const Vec2& p_or, const LimitSurface& ls,
    double theta_mu, double half_side, double sigma) {
  const int p = static_cast<int>(pred.s_e.size()) - 1;
  const int n = kB * p;
  if (static_cast<int>(refs.size()) < p + 1)
    throw std::invalid_argument("need a reference at every step boundary");
  if (z_nom.size() != n) throw std::invalid_argument("z_nom size mismatch");

  // The velocities reached at step i+1 are what the plant holds over interval
  // i, so block i couples the forces f_i to the twist of e_{i+1}. This also
  // keeps every block adjustable through its acceleration inputs; pairing f_i
  // with e_i would pin block 0 to the measured twist, with no way for the
  // program to recover once that twist leaves the friction cone.
  PushingConstraint pc;
  pc.m = MatX::Zero(2 * 3 * p, n);
  pc.b = VecX::Zero(2 * 3 * p);
  for (int i = 0; i < p; ++i) {
    const Vec5 e = pred.c_e[i + 1] + pred.s_e[i + 1] * z_nom;
    const Vec4 f = z_nom.segment<4>(kB * i + 2);
    const double theta = refs[i + 1].theta + e[2];
    const double v = refs[i + 1].v + e[3];
    const double w = refs[i + 1].w + e[4];

    const Mat34 g = grasp_matrix(theta, theta_mu, half_side);
    const Mat34 dg = grasp_matrix_dtheta(theta, theta_mu, half_side);
    const Vec3 residual = attached_twist(theta, v, w, p_or) - ls.h * (g * f);

    // d residual / d e, then chain through the prediction map.
    Eigen::Matrix<double, 3, 5> je = Eigen::Matrix<double, 3, 5>::Zero();
    je.rightCols<3>() = attached_twist_jacobian(theta, v, w, p_or);
    je.col(2) -= ls.h * (dg * f);

    MatX ji = je * pred.s_e[i + 1];
    ji.block<3, 4>(0, kB * i + 2) -= ls.h * g;

    const Vec3 anchor = ji * z_nom - residual;
    pc.m.middleRows<3>(6 * i) = ji;
    pc.m.middleRows<3>(6 * i + 3) = -ji;
    pc.b.segment<3>(6 * i) = anchor.array() + sigma;
    pc.b.segment<3>(6 * i + 3) = -anchor.array() + sigma;
  }
  return pc;
}

MpcController::MpcController(const ControllerConfig& cfg)
    : cfg_(cfg),
      ls_(limit_surface(cfg.friction, cfg.geometry)),
      theta_mu_(friction_half_angle(cfg.friction.mu_contact)) {
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (cfg.ts <= 0.0) throw std::invalid_argument("ts must be positive");
}

void MpcController::reset() {
  has_warm_ = false;
  z_warm_.resize(0);
  prev_w_.setZero();
}

ControlDecision MpcController::step(const RobotState& measured, const Vec2& p_or,
                                    std::span<const ReferenceSample> refs) {
  const int p = cfg_.horizon;
  const int n = kB * p;
  if (static_cast<int>(refs.size()) < p + 1)
    throw std::invalid_argument("refs must cover the horizon plus one sample");

  const ErrorState e0 = error_from_state(measured, refs[0]);
  VecX z_nom = VecX::Zero(n);
  if (has_warm_ && z_warm_.size() == n) z_nom = z_warm_;

  // Replace the sampled accelerations with the speed differences the discrete
  // prediction will actually integrate. They agree along smooth stretches and
  // stay exact across profile kinks (ramp ends), where the instantaneous
  // value over- or undershoots the interval mean and biases the prediction.
  std::vector<ReferenceSample> refs_fd(refs.begin(), refs.begin() + p + 1);
  for (int i = 0; i < p; ++i) {
    refs_fd[i].a = (refs[i + 1].v - refs[i].v) / cfg_.ts;
    refs_fd[i].eps = (refs[i + 1].w - refs[i].w) / cfg_.ts;
  }

  // Relinearize the dynamics along the nominal propagated under the warm
  // start accelerations.
  std::vector<ControlInput> u_nom(p);
  for (int i = 0; i < p; ++i) u_nom[i] = z_nom.segment<2>(kB * i);
  const std::vector<ErrorState> e_nom = predict_nominal(
      e0, std::span<const ReferenceSample>(refs_fd).first(p), u_nom, cfg_.ts);

  std::vector<LtvStepModel> models(p);
  std::vector<Vec4> dists(p);
  for (int i = 0; i < p; ++i) {
    dists[i] = disturbance(refs_fd[i]);
    models[i] = linearize_step(e_nom[i], dists[i], cfg_.ts);
  }
  const CondensedPrediction pred = condense_dynamics(models, e0, dists);
  const CondensedCost cost = build_condensed_cost(pred, cfg_.weights, prev_w_);

  QpProblem qp;
  qp.p = cost.p;
  qp.q = cost.q;

  Vec6 blk_lo, blk_hi, rate;
  blk_lo << -cfg_.limits.accel_max, -cfg_.limits.alpha_max, 0.0, 0.0, 0.0, 0.0;
  blk_hi << cfg_.limits.accel_max, cfg_.limits.alpha_max, cfg_.limits.force_max,
      cfg_.limits.force_max, cfg_.limits.force_max, cfg_.limits.force_max;
  rate << cfg_.limits.accel_max, cfg_.limits.alpha_max, cfg_.limits.force_max,
      cfg_.limits.force_max, cfg_.limits.force_max, cfg_.limits.force_max;
  rate *= cfg_.limits.rate_factor;

  qp.lo.resize(n);
  qp.hi.resize(n);
  for (int i = 0; i < p; ++i) {
    qp.lo.segment<kB>(kB * i) = blk_lo;
    qp.hi.segment<kB>(kB * i) = blk_hi;
  }
  // The first step's rate window is a box against the previously applied w.
  qp.lo.head<kB>() = qp.lo.head<kB>().cwiseMax(prev_w_ - rate);
  qp.hi.head<kB>() = qp.hi.head<kB>().cwiseMin(prev_w_ + rate);

  const int push_rows = cfg_.pushing_constraint ? 6 * p : 0;
  const int rate_rows = 2 * kB * (p - 1);
  qp.g = MatX::Zero(push_rows + rate_rows, n);
  qp.h = VecX::Zero(push_rows + rate_rows);
  if (cfg_.pushing_constraint) {
    const PushingConstraint pc =
        build_pushing_constraints(pred, refs, z_nom, p_or, ls_, theta_mu_,
                                  cfg_.geometry.half_side, cfg_.constraint_tol);
    qp.g.topRows(push_rows) = pc.m;
    qp.h.head(push_rows) = pc.b;
  }
  for (int i = 1; i < p; ++i) {
    for (int j = 0; j < kB; ++j) {
      const int r = push_rows + 2 * (kB * (i - 1) + j);
      qp.g(r, kB * i + j) = 1.0;
      qp.g(r, kB * (i - 1) + j) = -1.0;
      qp.h[r] = rate[j];
      qp.g(r + 1, kB * i + j) = -1.0;
      qp.g(r + 1, kB * (i - 1) + j) = 1.0;
      qp.h[r + 1] = rate[j];
    }
  }

  const QpSolution sol =
      solve_qp(qp, cfg_.qp, has_warm_ && z_nom.size() == n ? &z_nom : nullptr);

  ControlDecision dec;
  dec.status = sol.status;
  dec.qp_iterations = sol.iterations;
  bool usable = sol.status != QpStatus::infeasible && sol.z.allFinite();
  if (usable && sol.status == QpStatus::max_iters) {
    // Apply a truncated iterate only if it does not violate constraints
    // materially; otherwise decay instead of acting on garbage.
    usable = kkt_residuals(qp, sol.z, sol.duals).primal <= 1e-4;
  }
  if (usable) {
    dec.u = sol.z.head<2>()
                .cwiseMax(qp.lo.head<2>())
                .cwiseMin(qp.hi.head<2>());
    dec.forces = sol.z.segment<4>(2).cwiseMax(0.0);
    dec.plan = sol.z;
    prev_w_ << dec.u, dec.forces;
    z_warm_.resize(n);
    z_warm_.head(n - kB) = sol.z.tail(n - kB);
    z_warm_.tail<kB>() = sol.z.tail<kB>();
    has_warm_ = true;
  } else {
    // Brake toward rest within the input limits and drop the force plan. At
    // rest the commanded twist is zero, which admissible forces can always
    // produce, so the program regains feasibility instead of coasting on a
    // stale input ratio forever.
    dec.fallback = true;
    dec.u[0] = std::clamp(-measured.v / cfg_.ts, -cfg_.limits.accel_max,
                          cfg_.limits.accel_max);
    dec.u[1] = std::clamp(-measured.w / cfg_.ts, -cfg_.limits.alpha_max,
                          cfg_.limits.alpha_max);
    dec.forces.setZero();
    prev_w_ << dec.u, dec.forces;
    has_warm_ = false;
    z_warm_.resize(0);
  }
  dec.vel_cmd =
      Vec2(measured.v + cfg_.ts * dec.u[0], measured.w + cfg_.ts * dec.u[1]);
  return dec;
}

}  // namespace pushmpc
