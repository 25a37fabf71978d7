#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "pushmpc/pushing_model.hpp"

using namespace pushmpc;

TEST_SUITE("pushing_model") {

TEST_CASE("friction half angle matches bisection on tan") {
  // Independent oracle: bisect tan(x) = mu on (0, pi/2).
  const double mu = 0.3;
  double lo = 0.0, hi = M_PI / 2.0 - 1e-9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::tan(mid) < mu ? lo : hi) = mid;
  }
  const double theta = friction_half_angle(mu);
  CHECK(theta == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
  CHECK(theta == doctest::Approx(0.2914567944778671).epsilon(1e-12));
}

TEST_CASE("friction half angle edge cases") {
  CHECK(friction_half_angle(1.0) == doctest::Approx(M_PI / 4.0).epsilon(1e-15));
  CHECK_THROWS_AS(friction_half_angle(0.0), std::domain_error);
  CHECK_THROWS_AS(friction_half_angle(-0.2), std::domain_error);
}

TEST_CASE("grasp matrix single edge force, hand-built column") {
  const double theta_mu = M_PI / 4.0, s = 0.1;
  const Mat34 g = grasp_matrix(0.0, theta_mu, s);
  const Vec3 w = g * Vec4(1.0, 0.0, 0.0, 0.0);
  // Hand construction: point 1 sits at (-s, -s) from the COM, the R edge is
  // the pushing direction rotated by -theta_mu.
  const Vec2 dir(std::cos(-theta_mu), std::sin(-theta_mu));
  const Vec2 arm(-s, -s);
  CHECK(w[0] == doctest::Approx(dir.x()).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(dir.y()).epsilon(1e-14));
  CHECK(w[2] == doctest::Approx(arm.x() * dir.y() - arm.y() * dir.x()).epsilon(1e-14));
  CHECK(w[2] == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("grasp matrix frictionless symmetric push is pure translation") {
  const Mat34 g = grasp_matrix(0.0, 0.0, 0.1);
  const Vec3 w = g * Vec4::Ones();
  CHECK(w[0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("grasp matrix column structure") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int trial = 0; trial < 20; ++trial) {
    const double th = ang(rng);
    const Mat34 g = grasp_matrix(th, 0.25, 0.1);
    // Same-point cone edges share force directions across points.
    CHECK(g.block<2, 1>(0, 0) == g.block<2, 1>(0, 2));
    CHECK(g.block<2, 1>(0, 1) == g.block<2, 1>(0, 3));
    // Outer columns carry opposite torque arms, as do the inner ones.
    CHECK(g(2, 0) == doctest::Approx(-g(2, 3)).epsilon(1e-15));
    CHECK(g(2, 1) == doctest::Approx(-g(2, 2)).epsilon(1e-15));
  }
}

TEST_CASE("net force at each contact point stays inside the cone") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0), ang(-M_PI, M_PI);
  const double theta_mu = friction_half_angle(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const double th = ang(rng);
    const Mat34 g = grasp_matrix(th, theta_mu, 0.1);
    const Vec4 f(u(rng), u(rng), u(rng), u(rng));
    const Vec2 normal(std::cos(th), std::sin(th));
    for (int point = 0; point < 2; ++point) {
      const Vec2 net = g.block<2, 1>(0, 2 * point) * f[2 * point] +
                       g.block<2, 1>(0, 2 * point + 1) * f[2 * point + 1];
      if (net.norm() < 1e-12) continue;
      const double angle =
          std::atan2(normal.x() * net.y() - normal.y() * net.x(), normal.dot(net));
      CHECK(std::abs(angle) <= theta_mu + 1e-9);
    }
  }
}

TEST_CASE("mirroring the force components mirrors the wrench") {
  const double theta_mu = friction_half_angle(0.4);
  const Mat34 g = grasp_matrix(0.0, theta_mu, 0.1);
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec4 f(u(rng), u(rng), u(rng), u(rng));
    const Vec4 mirrored(f[3], f[2], f[1], f[0]);
    const Vec3 w = g * f, wm = g * mirrored;
    CHECK(wm[0] == doctest::Approx(w[0]).epsilon(1e-12));
    CHECK(wm[1] == doctest::Approx(-w[1]).epsilon(1e-12));
    CHECK(wm[2] == doctest::Approx(-w[2]).epsilon(1e-12));
  }
}

TEST_CASE("limit surface constants for the default object") {
  const LimitSurface ls = limit_surface(FrictionParams{}, ObjectGeometry{});
  CHECK(ls.f_max == doctest::Approx(0.3 * 1.0 * 9.81).epsilon(1e-15));
  // Mean COM distance: Monte Carlo oracle plus the closed form
  // s*(sqrt(2)+asinh(1))/3 of the footprint integral.
  const double mc = oracle::mc_mean_com_distance(0.1, 2'000'000, 42);
  CHECK(std::abs(ls.c - mc) < 1e-4);
  CHECK(ls.c == doctest::Approx(0.1 * (std::sqrt(2.0) + std::asinh(1.0)) / 3.0)
                    .epsilon(1e-9));
  CHECK(ls.c == doctest::Approx(0.0765196).epsilon(1e-5));
  CHECK(ls.tau_max == doctest::Approx(ls.f_max * ls.c).epsilon(1e-15));
}

TEST_CASE("limit surface matrix shape") {
  const LimitSurface ls = limit_surface(FrictionParams{}, ObjectGeometry{});
  CHECK(ls.h(0, 0) == ls.h(1, 1));
  CHECK(ls.h(0, 0) == doctest::Approx(1.0 / (ls.f_max * ls.f_max)).epsilon(1e-15));
  CHECK(ls.h(2, 2) == doctest::Approx(1.0 / (ls.tau_max * ls.tau_max)).epsilon(1e-15));
  CHECK(ls.h.isDiagonal(0.0));
  Eigen::SelfAdjointEigenSolver<Mat3> es(ls.h);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("doubling the mass scales the linear twist block by a quarter") {
  FrictionParams fp;
  const LimitSurface ls1 = limit_surface(fp, ObjectGeometry{});
  fp.object_mass *= 2.0;
  const LimitSurface ls2 = limit_surface(fp, ObjectGeometry{});
  CHECK(ls2.h(0, 0) == doctest::Approx(0.25 * ls1.h(0, 0)).epsilon(1e-12));
  CHECK(ls2.h(1, 1) == doctest::Approx(0.25 * ls1.h(1, 1)).epsilon(1e-12));
}

TEST_CASE("object twist example and linearity") {
  LimitSurface ls;
  ls.h = Vec3(1.0, 1.0, 10.0).asDiagonal();
  const Mat34 g = grasp_matrix(0.0, M_PI / 4.0, 0.1);
  const Vec3 tw = object_twist(ls, g, Vec4::Ones());
  CHECK(tw[0] == doctest::Approx(4.0 * std::cos(M_PI / 4.0)).epsilon(1e-12));
  CHECK(tw[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tw[2] == doctest::Approx(0.0).epsilon(1e-12));

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const Vec4 fa(u(rng), u(rng), u(rng), u(rng));
  const Vec4 fb(u(rng), u(rng), u(rng), u(rng));
  const Vec3 sum = object_twist(ls, g, fa + fb);
  const Vec3 parts = object_twist(ls, g, fa) + object_twist(ls, g, fb);
  CHECK((sum - parts).norm() < 1e-12);
}

TEST_CASE("grasp matrix heading derivative matches finite differences") {
  const double theta_mu = friction_half_angle(0.3), s = 0.1;
  std::mt19937 rng(91);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int trial = 0; trial < 20; ++trial) {
    const double theta = u(rng);
    const double h = 1e-6;
    const Mat34 fd = (grasp_matrix(theta + h, theta_mu, s) -
                      grasp_matrix(theta - h, theta_mu, s)) /
                     (2.0 * h);
    const Mat34 dg = grasp_matrix_dtheta(theta, theta_mu, s);
    CHECK((fd - dg).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(dg.row(2).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("limit surface rejects bad parameters") {
  FrictionParams fp;
  fp.mu_support = 0.0;
  CHECK_THROWS_AS(limit_surface(fp, ObjectGeometry{}), std::domain_error);
  ObjectGeometry geom;
  geom.half_side = -1.0;
  CHECK_THROWS_AS(limit_surface(FrictionParams{}, geom), std::domain_error);
}

}  // TEST_SUITE
