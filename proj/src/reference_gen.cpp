#include "pushmpc/reference_gen.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pushmpc {

namespace {

struct Pose {
  double x;
  double y;
  double theta;
};

TrapezoidProfile profile_of(const PathSegment& seg) {
  return TrapezoidProfile::plan(seg.length, seg.v_max, seg.a_max);
}

/// Pose after driving a full segment from `start`.
Pose advance_segment(const Pose& start, const PathSegment& seg) {
  Pose out = start;
  switch (seg.kind) {
    case PathSegment::Kind::line: {
      const double dir = seg.reverse ? -1.0 : 1.0;
      out.x += dir * seg.length * std::cos(start.theta);
      out.y += dir * seg.length * std::sin(start.theta);
      break;
    }
    case PathSegment::Kind::arc: {
      const double dth = seg.curvature * seg.length;
      out.theta = start.theta + dth;
      out.x += (std::sin(out.theta) - std::sin(start.theta)) / seg.curvature;
      out.y -= (std::cos(out.theta) - std::cos(start.theta)) / seg.curvature;
      break;
    }
    case PathSegment::Kind::spin: {
      const double dir = seg.curvature >= 0.0 ? 1.0 : -1.0;
      out.theta = start.theta + dir * seg.length;
      break;
    }
  }
  return out;
}

ReferenceSample sample_segment(const Pose& start, const PathSegment& seg,
                               double t_local) {
  const TrapezoidProfile prof = profile_of(seg);
  const double s = prof.position(t_local);
  const double v = prof.speed(t_local);
  const double a = prof.accel(t_local);

  ReferenceSample out;
  switch (seg.kind) {
    case PathSegment::Kind::line: {
      const double dir = seg.reverse ? -1.0 : 1.0;
      out.x = start.x + dir * s * std::cos(start.theta);
      out.y = start.y + dir * s * std::sin(start.theta);
      out.theta = start.theta;
      out.v = dir * v;
      out.w = 0.0;
      out.a = dir * a;
      out.eps = 0.0;
      break;
    }
    case PathSegment::Kind::arc: {
      const double th = start.theta + seg.curvature * s;
      out.x = start.x + (std::sin(th) - std::sin(start.theta)) / seg.curvature;
      out.y = start.y - (std::cos(th) - std::cos(start.theta)) / seg.curvature;
      out.theta = th;
      out.v = v;
      out.w = seg.curvature * v;
      out.a = a;
      out.eps = seg.curvature * a;
      break;
    }
    case PathSegment::Kind::spin: {
      const double dir = seg.curvature >= 0.0 ? 1.0 : -1.0;
      out.x = start.x;
      out.y = start.y;
      out.theta = start.theta + dir * s;
      out.v = 0.0;
      out.w = dir * v;
      out.a = 0.0;
      out.eps = dir * a;
      break;
    }
  }
  return out;
}

Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

void append_spin(ReferencePath& path, double from_heading, double to_heading,
                 const ManeuverParams& p) {
  const double delta = wrap_angle(to_heading - from_heading);
  if (std::abs(delta) < 1e-12) return;
  PathSegment spin;
  spin.kind = PathSegment::Kind::spin;
  spin.length = std::abs(delta);
  spin.curvature = delta >= 0.0 ? 1.0 : -1.0;
  spin.v_max = p.spin_w_max;
  spin.a_max = p.spin_a_max;
  path.segments.push_back(spin);
}

}  // namespace

TrapezoidProfile TrapezoidProfile::plan(double distance, double v_max,
                                        double a_max) {
  if (!(v_max > 0.0) || !(a_max > 0.0)) {
    throw std::invalid_argument("speed profile needs positive limits");
  }
  TrapezoidProfile p;
  if (distance <= 0.0) return p;
  p.distance = distance;
  p.a_max = a_max;
  p.peak = std::min(v_max, std::sqrt(distance * a_max));
  p.t_ramp = p.peak / a_max;
  p.t_cruise = (distance - p.peak * p.peak / a_max) / p.peak;
  p.t_cruise = std::max(p.t_cruise, 0.0);
  return p;
}

double TrapezoidProfile::position(double t) const {
  if (distance <= 0.0) return 0.0;
  t = std::clamp(t, 0.0, duration());
  if (t <= t_ramp) return 0.5 * a_max * t * t;
  const double ramp_dist = 0.5 * peak * t_ramp;
  if (t <= t_ramp + t_cruise) return ramp_dist + peak * (t - t_ramp);
  const double td = duration() - t;
  return distance - 0.5 * a_max * td * td;
}

double TrapezoidProfile::speed(double t) const {
  if (distance <= 0.0) return 0.0;
  t = std::clamp(t, 0.0, duration());
  if (t <= t_ramp) return a_max * t;
  if (t <= t_ramp + t_cruise) return peak;
  return a_max * (duration() - t);
}

double TrapezoidProfile::accel(double t) const {
  if (distance <= 0.0) return 0.0;
  if (t < 0.0 || t > duration()) return 0.0;
  if (t <= t_ramp) return a_max;
  if (t <= t_ramp + t_cruise) return 0.0;
  return -a_max;
}

double path_duration(const ReferencePath& path) {
  double total = 0.0;
  for (const PathSegment& seg : path.segments) total += profile_of(seg).duration();
  return total;
}

std::vector<double> segment_boundaries(const ReferencePath& path) {
  std::vector<double> ends;
  ends.reserve(path.segments.size());
  double total = 0.0;
  for (const PathSegment& seg : path.segments) {
    total += profile_of(seg).duration();
    ends.push_back(total);
  }
  return ends;
}

ReferenceSample sample_path(const ReferencePath& path, double t) {
  Pose pose{path.x0, path.y0, path.theta0};
  t = std::max(t, 0.0);
  for (const PathSegment& seg : path.segments) {
    const double dur = profile_of(seg).duration();
    if (t <= dur) return sample_segment(pose, seg, t);
    t -= dur;
    pose = advance_segment(pose, seg);
  }
  ReferenceSample out;
  out.x = pose.x;
  out.y = pose.y;
  out.theta = pose.theta;
  return out;
}

void path_end_pose(const ReferencePath& path, double& x, double& y,
                   double& theta) {
  Pose pose{path.x0, path.y0, path.theta0};
  for (const PathSegment& seg : path.segments) pose = advance_segment(pose, seg);
  x = pose.x;
  y = pose.y;
  theta = pose.theta;
}

Vec2 interval_twist(const ReferencePath& path, double t1, double t2) {
  if (!(t2 > t1)) throw std::invalid_argument("interval_twist needs t2 > t1");
  const double dt = t2 - t1;
  double offset = 0.0;
  for (const PathSegment& seg : path.segments) {
    const TrapezoidProfile prof = profile_of(seg);
    const double dur = prof.duration();
    // Starts within 1e-9 of a segment end belong to the next segment, so
    // intervals chunked exactly at boundaries never look like they span two
    // segments. The profile is at rest there, so nothing is misattributed.
    if (t1 - offset < dur - 1e-9) {
      if (t2 - offset > dur + 1e-9) {
        throw std::invalid_argument("interval_twist interval spans segments");
      }
      const double ds = prof.position(t2 - offset) - prof.position(t1 - offset);
      switch (seg.kind) {
        case PathSegment::Kind::line: {
          const double dir = seg.reverse ? -1.0 : 1.0;
          return {dir * ds / dt, 0.0};
        }
        case PathSegment::Kind::arc: {
          const double v = ds / dt;
          return {v, seg.curvature * v};
        }
        case PathSegment::Kind::spin: {
          const double dir = seg.curvature >= 0.0 ? 1.0 : -1.0;
          return {0.0, dir * ds / dt};
        }
      }
    }
    offset += dur;
  }
  return Vec2::Zero();  // past the end: at rest
}

ReferencePath line_path(double x0, double y0, double theta0, double length,
                        double v_max, double a_max) {
  ReferencePath path;
  path.x0 = x0;
  path.y0 = y0;
  path.theta0 = theta0;
  PathSegment seg;
  seg.kind = PathSegment::Kind::line;
  seg.length = length;
  seg.v_max = v_max;
  seg.a_max = a_max;
  path.segments.push_back(seg);
  return path;
}

double side_push_heading(double obj_theta, int side) {
  return wrap_angle(obj_theta + side * std::numbers::pi / 2.0 + std::numbers::pi);
}

ReferencePath repositioning_maneuver(const RobotState& robot, double obj_x,
                                     double obj_y, double obj_theta,
                                     int target_side, const ManeuverParams& p) {
  const Vec2 center{obj_x, obj_y};
  const Vec2 pos{robot.x, robot.y};
  const Vec2 heading = unit(robot.theta);
  const double psi_new = side_push_heading(obj_theta, target_side);
  const double r_clear = p.circumradius + p.clearance_margin;

  // Retreat straight back at least retreat_min, further if that would leave
  // the transfer arc cutting inside the clearance circle.
  const Vec2 w = pos - center;
  double retreat = p.retreat_min;
  {
    const Vec2 after = pos - retreat * heading;
    if ((after - center).norm() < r_clear) {
      const double wu = w.dot(heading);
      const double disc = wu * wu - w.squaredNorm() + r_clear * r_clear;
      retreat = std::max(retreat, wu + std::sqrt(std::max(disc, 0.0)));
    }
  }
  const Vec2 p1 = pos - retreat * heading;
  const double r_arc = (p1 - center).norm();

  ReferencePath path;
  path.x0 = robot.x;
  path.y0 = robot.y;
  path.theta0 = robot.theta;

  PathSegment back;
  back.kind = PathSegment::Kind::line;
  back.length = retreat;
  back.reverse = true;
  back.v_max = p.travel_v_max;
  back.a_max = p.travel_a_max;
  path.segments.push_back(back);

  // Transfer arc around the object from the retreat point to the approach ray
  // of the target side, shorter direction.
  const double alpha0 = std::atan2(p1.y() - center.y(), p1.x() - center.x());
  const double alpha1 = psi_new + std::numbers::pi;
  const double sweep = wrap_angle(alpha1 - alpha0);
  double heading_after_arc = robot.theta;
  if (std::abs(sweep) > 1e-12) {
    const double turn = sweep >= 0.0 ? 1.0 : -1.0;
    const double tangent0 = alpha0 + turn * std::numbers::pi / 2.0;
    append_spin(path, robot.theta, tangent0, p);
    PathSegment arc;
    arc.kind = PathSegment::Kind::arc;
    arc.length = std::abs(sweep) * r_arc;
    arc.curvature = turn / r_arc;
    arc.v_max = p.travel_v_max;
    arc.a_max = p.travel_a_max;
    path.segments.push_back(arc);
    heading_after_arc = tangent0 + sweep;
  }

  append_spin(path, heading_after_arc, psi_new, p);

  PathSegment approach;
  approach.kind = PathSegment::Kind::line;
  approach.length = r_arc - p.contact_distance;
  approach.v_max = p.approach_speed;
  approach.a_max = p.approach_a_max;
  path.segments.push_back(approach);

  return path;
}

}  // namespace pushmpc
