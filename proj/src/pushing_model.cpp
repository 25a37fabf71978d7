#include "pushmpc/pushing_model.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pushmpc {
namespace {

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGlPoints = 10;
constexpr double kGlNode[kGlPoints] = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
    -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
    0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
    0.9739065285171717};
constexpr double kGlWeight[kGlPoints] = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
    0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
    0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
    0.0666713443086881};

// Mean of sqrt(x^2+y^2) over the square [-s,s]^2. Composite quadrature on one
// quadrant (the integrand is symmetric); panels keep the corner kink at the
// origin from polluting global accuracy.
double mean_com_distance(double s) {
  constexpr int kPanels = 8;
  const double dp = s / kPanels;
  double integral = 0.0;
  for (int px = 0; px < kPanels; ++px) {
    for (int py = 0; py < kPanels; ++py) {
      const double x0 = px * dp, y0 = py * dp;
      double panel = 0.0;
      for (int i = 0; i < kGlPoints; ++i) {
        const double x = x0 + 0.5 * dp * (1.0 + kGlNode[i]);
        for (int j = 0; j < kGlPoints; ++j) {
          const double y = y0 + 0.5 * dp * (1.0 + kGlNode[j]);
          panel += kGlWeight[i] * kGlWeight[j] * std::hypot(x, y);
        }
      }
      integral += panel * 0.25 * dp * dp;
    }
  }
  return integral / (s * s);  // quadrant integral over quadrant area
}

}  // namespace

double friction_half_angle(double mu) {
  if (mu <= 0.0) throw std::domain_error("friction coefficient must be positive");
  return std::atan(mu);
}

Mat34 grasp_matrix(double theta_r, double theta_mu, double half_side) {
  assert(theta_mu >= 0.0 && theta_mu < M_PI / 2.0);
  assert(half_side > 0.0);
  const double s = half_side;
  const double cm = std::cos(theta_mu), sm = std::sin(theta_mu);
  const double a_r = theta_r - theta_mu;  // right cone edge direction
  const double a_l = theta_r + theta_mu;  // left cone edge direction
  Mat34 g;
  g << std::cos(a_r), std::cos(a_l), std::cos(a_r), std::cos(a_l),
       std::sin(a_r), std::sin(a_l), std::sin(a_r), std::sin(a_l),
       s * (cm + sm), s * (cm - sm), s * (sm - cm), -s * (cm + sm);
  return g;
}

Mat34 grasp_matrix_dtheta(double theta_r, double theta_mu, double half_side) {
  assert(theta_mu >= 0.0 && theta_mu < M_PI / 2.0);
  assert(half_side > 0.0);
  (void)half_side;  // the torque row is rotation invariant
  const double a_r = theta_r - theta_mu;
  const double a_l = theta_r + theta_mu;
  Mat34 dg = Mat34::Zero();
  dg << -std::sin(a_r), -std::sin(a_l), -std::sin(a_r), -std::sin(a_l),
        std::cos(a_r), std::cos(a_l), std::cos(a_r), std::cos(a_l),
        0.0, 0.0, 0.0, 0.0;
  return dg;
}

LimitSurface limit_surface(const FrictionParams& fp, const ObjectGeometry& geom) {
  if (fp.mu_support <= 0.0 || fp.object_mass <= 0.0 || fp.gravity <= 0.0)
    throw std::domain_error("limit surface parameters must be positive");
  if (geom.half_side <= 0.0) throw std::domain_error("half_side must be positive");
  LimitSurface ls;
  ls.f_max = fp.mu_support * fp.object_mass * fp.gravity;
  ls.c = mean_com_distance(geom.half_side);
  ls.tau_max = ls.f_max * ls.c;
  ls.h = Mat3::Zero();
  ls.h(0, 0) = 1.0 / (ls.f_max * ls.f_max);
  ls.h(1, 1) = ls.h(0, 0);
  ls.h(2, 2) = 1.0 / (ls.tau_max * ls.tau_max);
  return ls;
}

Vec3 object_twist(const LimitSurface& ls, const Mat34& g, const ContactForces& f) {
  return ls.h * (g * f);
}

}  // namespace pushmpc
