#include "pushmpc/plant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pushmpc {

namespace {

constexpr double kZeroForce = 1e-12;

/// Misalignment of the nearest object face relative to the bumper plane,
/// folded into [-pi/4, pi/4].
double face_misalignment(const WorldState& w) {
  const double rel = wrap_angle(w.object.theta - w.robot.theta);
  const double quarter = M_PI / 2.0;
  return rel - std::round(rel / quarter) * quarter;
}

/// Exact constant-twist pose advance.
void arc_advance(RobotState& r, const Vec2& cmd, double dt) {
  const double v = cmd[0];
  const double w = cmd[1];
  if (std::abs(w) < 1e-12) {
    r.x += v * dt * std::cos(r.theta);
    r.y += v * dt * std::sin(r.theta);
  } else {
    const double th1 = r.theta + w * dt;
    r.x += v / w * (std::sin(th1) - std::sin(r.theta));
    r.y -= v / w * (std::cos(th1) - std::cos(r.theta));
    r.theta = th1;
  }
  r.v = v;
  r.w = w;
}

/// Rigid-coupled object twist for a robot command: the world velocity of the
/// object center if it stayed fixed in the robot frame.
Vec3 rigid_twist(const WorldState& w, const Vec2& cmd) {
  const double dx = w.object.x - w.robot.x;
  const double dy = w.object.y - w.robot.y;
  return {cmd[0] * std::cos(w.robot.theta) - cmd[1] * dy,
          cmd[0] * std::sin(w.robot.theta) + cmd[1] * dx, cmd[1]};
}

/// Moves f along the kernel of `a` to the minimum-norm point of the optimal
/// face, staying nonnegative. The fit a*f is untouched, so this only picks the
/// canonical representative when the force split is degenerate (a centered
/// push spreads evenly over the cone edges instead of loading two of them).
VecX min_norm_on_face(const MatX& a, VecX f) {
  const Eigen::FullPivLU<MatX> lu(a);
  const MatX kernel = lu.kernel();
  if (kernel.cols() != 1) return f;
  const VecX n = kernel.col(0).normalized();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (n[i] > 1e-12) lo = std::max(lo, -f[i] / n[i]);
    else if (n[i] < -1e-12) hi = std::min(hi, -f[i] / n[i]);
  }
  if (!(lo <= hi)) return f;
  f += std::clamp(-f.dot(n), lo, hi) * n;
  return f.cwiseMax(0.0);
}

ContactStatus resolve_with(const PlantParams& p, const LimitSurface& ls,
                           double theta_mu, const WorldState& w,
                           const Vec2& cmd) {
  ContactStatus st;
  st.lateral_offset = object_in_robot_frame(w).y();
  st.gap = contact_gap(p, w);
  if (!in_line_contact(p, w)) return st;

  const Mat34 g =
      grasp_matrix(w.robot.theta, theta_mu, p.geometry.half_side);
  const Vec3 demanded = rigid_twist(w, cmd);
  const MatX a = ls.h * g;
  const VecX f = min_norm_on_face(a, nnls_solve(a, demanded));
  st.forces = f;
  st.residual = (a * f - demanded).norm();
  st.wrench = g * st.forces;

  if (f.lpNorm<Eigen::Infinity>() <= kZeroForce) {
    if (demanded.norm() <= kZeroForce) {
      st.mode = ContactMode::stick;  // everything at rest
      st.object_twist.setZero();
    }
    return st;  // demanded motion needs pulling: contact separates
  }
  if (st.residual <= p.stick_tol) {
    st.mode = ContactMode::stick;
    st.object_twist = demanded;
    return st;
  }

  st.mode = ContactMode::slip;
  Vec3 achieved = a * f;
  // Unilateral contact: the fit may not drive the object off the bumper
  // faster than the robot closes. Shed force uniformly until the normal
  // velocities match; the gap projection handles the lagging direction.
  const Vec2 u{std::cos(w.robot.theta), std::sin(w.robot.theta)};
  const double demanded_n = demanded.head<2>().dot(u);
  const double achieved_n = achieved.head<2>().dot(u);
  if (achieved_n > demanded_n && achieved_n > kZeroForce) {
    const double beta = std::max(demanded_n, 0.0) / achieved_n;
    st.forces *= beta;
    st.wrench *= beta;
    achieved *= beta;
  }
  st.object_twist = achieved;
  return st;
}

void project_penetration(const PlantParams& p, WorldState& w) {
  const double gap = contact_gap(p, w);
  if (gap >= 0.0) return;
  // The bumper is a finite segment, so only resolve overlap when the object
  // actually crosses it laterally and only at face-contact depths. The plane
  // distance alone goes negative for objects that are beside or behind the
  // robot, and acting on it would shove them around without any touch (a
  // robot spinning in place near the object would sweep it away).
  const Vec2 rp = object_in_robot_frame(w);
  const double delta = face_misalignment(w);
  const double lateral_extent =
      p.geometry.half_side * (std::cos(delta) + std::abs(std::sin(delta)));
  if (std::abs(rp.y()) > p.bumper_half_width + lateral_extent) return;
  if (-gap > p.geometry.half_side) return;
  w.object.x -= gap * std::cos(w.robot.theta);
  w.object.y -= gap * std::sin(w.robot.theta);
}

}  // namespace

const char* contact_mode_name(ContactMode m) {
  switch (m) {
    case ContactMode::stick: return "stick";
    case ContactMode::slip: return "slip";
    case ContactMode::broken: return "broken";
  }
  return "?";
}

VecX nnls_solve(const MatX& a, const VecX& b) {
  const int n = static_cast<int>(a.cols());
  VecX x = VecX::Zero(n);
  std::vector<char> passive(n, 0);
  VecX grad = a.transpose() * b;
  const double tol = 1e-10 * (1.0 + grad.cwiseAbs().maxCoeff());

  std::vector<int> idx;
  const int max_outer = 3 * n + 30;
  for (int outer = 0; outer < max_outer; ++outer) {
    // Most violated optimality condition among the clamped variables.
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[i] && grad[i] > best_w) {
        best_w = grad[i];
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = 1;

    for (int inner = 0; inner <= n; ++inner) {
      idx.clear();
      for (int i = 0; i < n; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      MatX ap(a.rows(), idx.size());
      for (size_t k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
      const VecX z = ap.colPivHouseholderQr().solve(b);

      if (z.minCoeff() > 0.0) {
        x.setZero();
        for (size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[k];
        break;
      }
      // Back off along the segment to the first variable hitting zero.
      double alpha = 1.0;
      for (size_t k = 0; k < idx.size(); ++k) {
        if (z[k] <= 0.0) {
          const double xk = x[idx[k]];
          alpha = std::min(alpha, xk / (xk - z[k]));
        }
      }
      for (size_t k = 0; k < idx.size(); ++k) {
        x[idx[k]] += alpha * (z[k] - x[idx[k]]);
        if (x[idx[k]] <= kZeroForce) {
          x[idx[k]] = 0.0;
          passive[idx[k]] = 0;
        }
      }
    }
    grad = a.transpose() * (b - a * x);
  }
  return x;
}

Vec2 object_in_robot_frame(const WorldState& w) {
  const Vec2 dp{w.object.x - w.robot.x, w.object.y - w.robot.y};
  return rotation2(w.robot.theta).transpose() * dp;
}

double contact_gap(const PlantParams& p, const WorldState& w) {
  const Vec2 rp = object_in_robot_frame(w);
  const double delta = face_misalignment(w);
  const double extent =
      p.geometry.half_side * (std::cos(delta) + std::abs(std::sin(delta)));
  return rp.x() - p.bumper_offset - extent;
}

bool in_line_contact(const PlantParams& p, const WorldState& w) {
  if (contact_gap(p, w) > p.gap_tol) return false;
  if (std::abs(face_misalignment(w)) > p.align_tol) return false;
  const Vec2 rp = object_in_robot_frame(w);
  return std::abs(rp.y()) <= p.bumper_half_width - p.geometry.half_side;
}

WorldState attach_world(const PlantParams& p, const RobotState& robot) {
  WorldState w;
  w.robot = robot;
  const double d = p.bumper_offset + p.geometry.half_side;
  w.object.x = robot.x + d * std::cos(robot.theta);
  w.object.y = robot.y + d * std::sin(robot.theta);
  w.object.theta = robot.theta;
  return w;
}

ContactStatus resolve_contact(const PlantParams& p, const WorldState& w,
                              const Vec2& cmd) {
  const LimitSurface ls = limit_surface(p.friction, p.geometry);
  const double theta_mu = friction_half_angle(p.friction.mu_contact);
  return resolve_with(p, ls, theta_mu, w, cmd);
}

ContactStatus step_world(const PlantParams& p, WorldState& w, const Vec2& cmd,
                         double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_world needs dt > 0");
  const LimitSurface ls = limit_surface(p.friction, p.geometry);
  const double theta_mu = friction_half_angle(p.friction.mu_contact);
  const int n = std::max(p.substeps, 1);
  const double h = dt / n;

  ContactStatus first;
  for (int k = 0; k < n; ++k) {
    const ContactStatus st = resolve_with(p, ls, theta_mu, w, cmd);
    if (k == 0) first = st;

    const RobotState before = w.robot;
    arc_advance(w.robot, cmd, h);

    switch (st.mode) {
      case ContactMode::stick: {
        // Carry the object rigidly: same pose in the robot frame.
        const Vec2 rel = rotation2(before.theta).transpose() *
                         Vec2{w.object.x - before.x, w.object.y - before.y};
        const double rel_th = w.object.theta - before.theta;
        const Vec2 pos =
            Vec2{w.robot.x, w.robot.y} + rotation2(w.robot.theta) * rel;
        w.object.x = pos.x();
        w.object.y = pos.y();
        w.object.theta = w.robot.theta + rel_th;
        break;
      }
      case ContactMode::slip: {
        w.object.x += st.object_twist[0] * h;
        w.object.y += st.object_twist[1] * h;
        w.object.theta += st.object_twist[2] * h;
        break;
      }
      case ContactMode::broken:
        break;
    }
    project_penetration(p, w);
  }
  w.time += dt;
  return first;
}

}  // namespace pushmpc
