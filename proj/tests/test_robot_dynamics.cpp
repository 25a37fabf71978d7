#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pushmpc/robot_dynamics.hpp"

using namespace pushmpc;

namespace {

ReferenceSample make_ref(double x, double y, double theta, double v, double w,
                         double a = 0.0, double eps = 0.0) {
  ReferenceSample r;
  r.x = x; r.y = y; r.theta = theta; r.v = v; r.w = w; r.a = a; r.eps = eps;
  return r;
}

}  // namespace

TEST_SUITE("robot_dynamics") {

TEST_CASE("error transform rotates into the reference frame") {
  RobotState s;
  s.x = 1.0; s.y = 1.0; s.theta = M_PI / 2.0;
  const ReferenceSample ref = make_ref(1.0, 0.0, M_PI / 2.0, 0.0, 0.0);
  const ErrorState e = error_from_state(s, ref);
  // World +y offset with the reference heading +y is a longitudinal error.
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(e[2] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("error transform wraps the attitude error") {
  RobotState s;
  s.theta = 3.0;
  const ReferenceSample ref = make_ref(0.0, 0.0, -3.0, 0.0, 0.0);
  const ErrorState e = error_from_state(s, ref);
  CHECK(e[2] == doctest::Approx(6.0 - 2.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("error transform round trip") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    RobotState s;
    s.x = u(rng); s.y = u(rng); s.theta = 0.4 * u(rng);
    s.v = u(rng); s.w = u(rng);
    const ReferenceSample ref =
        make_ref(u(rng), u(rng), 0.4 * u(rng), u(rng), u(rng));
    const RobotState back = state_from_error(error_from_state(s, ref), ref);
    CHECK(back.x == doctest::Approx(s.x).epsilon(1e-12));
    CHECK(back.y == doctest::Approx(s.y).epsilon(1e-12));
    CHECK(back.theta == doctest::Approx(s.theta).epsilon(1e-12));
    CHECK(back.v == doctest::Approx(s.v).epsilon(1e-12));
    CHECK(back.w == doctest::Approx(s.w).epsilon(1e-12));
  }
}

TEST_CASE("error dynamics on a curved reference") {
  ErrorState e;
  e << 0.0, 1.0, 0.0, 0.0, 0.0;
  const Vec4 v(1.0, 0.5, 0.0, 0.0);
  const ErrorState f = error_dynamics_rhs(e, ControlInput(0.0, 0.0), v);
  CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f.tail<3>().norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("error dynamics with a heading error") {
  ErrorState e;
  e << 0.0, 0.0, M_PI / 2.0, 0.0, 0.0;
  const Vec4 v(1.0, 0.0, 0.0, 0.0);
  const ErrorState f = error_dynamics_rhs(e, ControlInput(0.0, 0.0), v);
  CHECK(f[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("feedforward keeps the equilibrium") {
  const ReferenceSample ref = make_ref(0.0, 0.0, 0.3, 0.8, 0.2, 0.1, -0.05);
  std::vector<ReferenceSample> refs(10, ref);
  std::vector<ControlInput> inputs(10, ControlInput(ref.a, ref.eps));
  const auto traj = predict_nominal(ErrorState::Zero(), refs, inputs, 0.1);
  REQUIRE(traj.size() == 11);
  for (const auto& e : traj) CHECK(e.norm() < 1e-14);
}

TEST_CASE("lateral offset persists on a straight reference") {
  ErrorState e0;
  e0 << 0.0, 0.1, 0.0, 0.0, 0.0;
  std::vector<ReferenceSample> refs(5, make_ref(0.0, 0.0, 0.0, 1.0, 0.0));
  std::vector<ControlInput> inputs(5, ControlInput::Zero());
  const auto traj = predict_nominal(e0, refs, inputs, 0.1);
  CHECK((traj.back() - e0).norm() < 1e-14);
}

TEST_CASE("prediction matches a fine-step reference integration") {
  ErrorState e0;
  e0 << 0.1, -0.2, 0.7, 0.05, -0.1;
  const ReferenceSample ref = make_ref(0.0, 0.0, 0.0, 1.0, 0.3);
  const ControlInput u(0.2, -0.1);
  const double ts = 0.1;
  const int p = 10;
  std::vector<ReferenceSample> refs(p, ref);
  std::vector<ControlInput> inputs(p, u);
  const auto traj = predict_nominal(e0, refs, inputs, ts);

  // Independent check: midpoint method at ts/1000 on the same held inputs.
  ErrorState e = e0;
  const Vec4 v = disturbance(ref);
  const double h = ts / 1000.0;
  for (int i = 0; i < p * 1000; ++i) {
    const ErrorState mid = e + 0.5 * h * error_dynamics_rhs(e, u, v);
    e += h * error_dynamics_rhs(mid, u, v);
  }
  CHECK((traj.back() - e).norm() < 1e-6);
}

TEST_CASE("integration error shrinks fourth order in the step") {
  ErrorState e0;
  e0 << 0.1, -0.2, 0.7, 0.05, -0.1;
  const ReferenceSample ref = make_ref(0.0, 0.0, 0.0, 1.0, 0.3);
  const ControlInput u(0.2, -0.1);
  const double horizon = 0.8;

  auto endpoint = [&](double ts, int steps) {
    std::vector<ReferenceSample> refs(steps, ref);
    std::vector<ControlInput> inputs(steps, u);
    return predict_nominal(e0, refs, inputs, ts).back();
  };
  const ErrorState truth = endpoint(horizon / 4096.0, 4096);
  const double err_coarse = (endpoint(horizon / 4.0, 4) - truth).norm();
  const double err_fine = (endpoint(horizon / 8.0, 8) - truth).norm();
  const double ratio = err_coarse / err_fine;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

}  // TEST_SUITE
